#include "xychain/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "xychain/correlators.hpp"
#include "xychain/error.hpp"
#include "xychain/fisher.hpp"
#include "xychain/parallel.hpp"

namespace xychain {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCriticalBand = 1e-9;
constexpr double kCriticalNudge = 1e-3;
constexpr double kFlatTol = 1e-9;
constexpr double kVarianceSlack = 1e-12;
constexpr double kInvPhi = 0.6180339887498949;

std::array<double, 4> safe_log(const Probabilities& p) {
  std::array<double, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = p[k] > 0.0 ? std::log(p[k]) : kNegInf;
  return out;
}

double round_log_likelihood(const std::array<double, 4>& logp, const Counts& counts) {
  double ll = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (counts[k] == 0) continue;
    if (logp[k] == kNegInf) return kNegInf;
    ll += static_cast<double>(counts[k]) * logp[k];
  }
  return ll;
}

std::uint64_t total(const Counts& c) { return c[0] + c[1] + c[2] + c[3]; }

void require_grid(const CouplingGrid& g) {
  if (!(std::isfinite(g.lo) && std::isfinite(g.hi) && g.lo < g.hi) || g.points < 3) {
    throw Error(ErrorKind::InvalidArgument, "estimator grid needs finite lo < hi and at least 3 points");
  }
}

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

Probabilities outcome_probabilities(const ChainParams& effective, const QuadratureConfig& quad) {
  const TwoSpinXState s = x_state(effective, quad);
  Probabilities p{std::max(s.a_plus, 0.0), std::max(s.c, 0.0), std::max(s.c, 0.0), std::max(s.a_minus, 0.0)};
  const double sum = p[0] + p[1] + p[2] + p[3];
  for (double& x : p) x /= sum;
  return p;
}

Counts sample_outcomes(const Probabilities& probs, std::uint64_t shots, std::mt19937_64& rng) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -1e-12) throw Error(ErrorKind::InvalidArgument, "invalid outcome probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "outcome probabilities must sum to 1");

  Counts out{};
  std::uint64_t remaining = shots;
  double mass = 1.0;
  for (std::size_t k = 0; k < 3 && remaining > 0; ++k) {
    const double p = std::max(probs[k], 0.0);
    const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, q);
    out[k] = draw(rng);
    remaining -= out[k];
    mass -= p;
  }
  out[3] += remaining;
  return out;
}

Counts sample_outcomes(const Probabilities& probs, std::uint64_t shots, std::uint64_t seed) {
  std::mt19937_64 rng = seeded_engine(seed);
  return sample_outcomes(probs, shots, rng);
}

LikelihoodModel::LikelihoodModel(double gamma, double D, CouplingGrid grid, QuadratureConfig quad)
    : gamma_(gamma), D_(D), grid_(grid), quad_(quad) {
  require_grid(grid_);
  validate(ChainParams{grid_.lo, gamma_, D_});
  validate(quad_);
  log_table_pos_.resize(grid_.points);
  log_table_neg_.resize(grid_.points);
  parallel_for(grid_.points, [&](std::size_t i) {
    const double j = grid_.at(i);
    log_table_pos_[i] = log_probabilities(j);
    log_table_neg_[i] = log_probabilities(-j);
  });
}

Probabilities LikelihoodModel::probabilities(double j) const {
  return outcome_probabilities(ChainParams{j, gamma_, D_}, quad_);
}

std::array<double, 4> LikelihoodModel::log_probabilities(double j) const { return safe_log(probabilities(j)); }

double LikelihoodModel::fisher_j(double j) const {
  if (std::abs(std::abs(j) - 1.0) < kCriticalBand) j = std::copysign(1.0 - kCriticalNudge, j);
  return magnetization_fi(ChainParams{j, gamma_, D_}, Param::J, quad_).value;
}

double LikelihoodModel::log_likelihood(double J, std::span<const RoundData> rounds) const {
  double ll = 0.0;
  for (const RoundData& r : rounds) {
    ll += round_log_likelihood(log_probabilities(J / r.B), r.counts);
    if (ll == kNegInf) break;
  }
  return ll;
}

double LikelihoodModel::interpolated_log_likelihood(double J, std::span<const RoundData> rounds) const {
  const double step = (grid_.hi - grid_.lo) / static_cast<double>(grid_.points - 1);
  double ll = 0.0;
  for (const RoundData& r : rounds) {
    const double j = J / r.B;
    const std::vector<std::array<double, 4>>* table = nullptr;
    double x = 0.0;
    if (j >= grid_.lo && j <= grid_.hi) {
      table = &log_table_pos_;
      x = (j - grid_.lo) / step;
    } else if (-j >= grid_.lo && -j <= grid_.hi) {
      table = &log_table_neg_;
      x = (-j - grid_.lo) / step;
    }
    std::array<double, 4> logp;
    if (table == nullptr) {
      logp = log_probabilities(j);
    } else {
      const std::size_t i = std::min(static_cast<std::size_t>(x), grid_.points - 2);
      const double t = x - static_cast<double>(i);
      const auto& left = (*table)[i];
      const auto& right = (*table)[i + 1];
      for (std::size_t k = 0; k < 4; ++k) {
        if (left[k] == kNegInf || right[k] == kNegInf) {
          logp[k] = t <= 0.0 ? left[k] : (t >= 1.0 ? right[k] : kNegInf);
        } else {
          logp[k] = left[k] + t * (right[k] - left[k]);
        }
      }
    }
    ll += round_log_likelihood(logp, r.counts);
    if (ll == kNegInf) break;
  }
  return ll;
}

MleResult LikelihoodModel::estimate(std::span<const RoundData> rounds, int sign) const {
  if (rounds.empty()) throw Error(ErrorKind::InvalidArgument, "estimate needs at least one round");
  for (const RoundData& r : rounds) {
    if (total(r.counts) == 0) throw Error(ErrorKind::InvalidArgument, "a round has no recorded shots");
    if (!std::isfinite(r.B) || r.B == 0.0) throw Error(ErrorKind::InvalidArgument, "field B must be finite and nonzero");
  }
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "sign must be +1 or -1");

  const RoundData& last = rounds.back();
  const auto earlier = rounds.first(rounds.size() - 1);
  const auto& own_table = sign > 0 ? log_table_pos_ : log_table_neg_;
  const std::size_t n = grid_.points;
  auto candidate = [&](std::size_t i) { return sign * grid_.at(i) * last.B; };

  std::vector<double> ll(n);
  for (std::size_t i = 0; i < n; ++i) {
    ll[i] = round_log_likelihood(own_table[i], last.counts);
    if (ll[i] != kNegInf && !earlier.empty()) ll[i] += interpolated_log_likelihood(candidate(i), earlier);
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(ll.begin(), ll.end()) - ll.begin());

  MleResult out;
  if (ll[best] == kNegInf) {
    // No candidate can produce the data; report the edge closest to it.
    out.estimate = candidate(0);
    out.at_edge = true;
  } else {
    const double tol = kFlatTol * (1.0 + std::abs(ll[best]));
    std::size_t first = best;
    std::size_t last_flat = best;
    while (first > 0 && std::abs(ll[first - 1] - ll[best]) <= tol) --first;
    while (last_flat + 1 < n && std::abs(ll[last_flat + 1] - ll[best]) <= tol) ++last_flat;

    if (last_flat > first) {
      out.degenerate = true;
      out.estimate = 0.5 * (candidate(first) + candidate(last_flat));
      out.at_edge = first == 0 || last_flat == n - 1;
    } else if (best == 0 || best == n - 1) {
      out.at_edge = true;
      out.estimate = candidate(best);
    } else {
      double a = std::min(candidate(best - 1), candidate(best + 1));
      double b = std::max(candidate(best - 1), candidate(best + 1));
      auto f = [&](double J) { return log_likelihood(J, rounds); };
      double x1 = b - kInvPhi * (b - a);
      double x2 = a + kInvPhi * (b - a);
      double f1 = f(x1);
      double f2 = f(x2);
      while (b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + kInvPhi * (b - a);
          f2 = f(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - kInvPhi * (b - a);
          f1 = f(x1);
        }
      }
      const double refined = 0.5 * (a + b);
      const double at_node = candidate(best);
      out.estimate = f(refined) >= f(at_node) ? refined : at_node;
    }
  }

  double info = 0.0;
  for (const RoundData& r : rounds) {
    info += static_cast<double>(total(r.counts)) * fisher_j(out.estimate / r.B) / (r.B * r.B);
  }
  if (info > 0.0) {
    out.variance = 1.0 / info;
  } else {
    out.variance = std::numeric_limits<double>::infinity();
    out.uninformative = true;
  }
  return out;
}

MleResult mle_estimate(const Counts& counts, double B, double gamma, double D, const CouplingGrid& grid,
                       const QuadratureConfig& quad) {
  const LikelihoodModel model(gamma, D, grid, quad);
  const RoundData round{B, counts};
  return model.estimate(std::span<const RoundData>(&round, 1), 1);
}

void validate(const ProtocolConfig& cfg) {
  auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!std::isfinite(cfg.J_true)) fail("J_true must be finite");
  if (!std::isfinite(cfg.J_guess) || cfg.J_guess == 0.0) fail("J_guess must be finite and nonzero");
  validate(ChainParams{cfg.J_true, cfg.gamma, cfg.D});
  if (cfg.shots < 1) fail("shots per round must be at least 1");
  if (cfg.rounds < 1) fail("at least one round is required");
  require_grid(cfg.grid);
  if (cfg.grid.lo < 0.0) fail("the estimator grid spans |j| and needs lo >= 0");
  if (cfg.region != 1 && cfg.region != -1) fail("region must be +1 or -1");
  validate(cfg.quad);
}

namespace {

bool rounds_converged(const std::vector<RoundRecord>& rs) {
  for (const RoundRecord& r : rs) {
    if (r.at_edge || r.degenerate || !std::isfinite(r.variance)) return false;
  }
  for (std::size_t k = 1; k < rs.size(); ++k) {
    if (rs[k].variance > rs[k - 1].variance * (1.0 + kVarianceSlack)) return false;
  }
  if (rs.size() >= 2) {
    const RoundRecord& a = rs[rs.size() - 2];
    const RoundRecord& b = rs.back();
    if (std::abs(b.estimate - a.estimate) > 3.0 * std::sqrt(a.variance + b.variance)) return false;
  }
  return true;
}

}  // namespace

ProtocolTrace adaptive_run(const ProtocolConfig& cfg) {
  validate(cfg);
  const LikelihoodModel model(cfg.gamma, cfg.D, cfg.grid, cfg.quad);
  return adaptive_run(cfg, model);
}

ProtocolTrace adaptive_run(const ProtocolConfig& cfg, const LikelihoodModel& model) {
  validate(cfg);
  std::mt19937_64 rng = seeded_engine(cfg.seed);
  std::vector<RoundData> data;
  ProtocolTrace trace;
  int region = cfg.region;
  double B = region * cfg.J_guess;

  auto play_round = [&](bool switched) {
    const Counts counts = sample_outcomes(model.probabilities(cfg.J_true / B), cfg.shots, rng);
    data.push_back({B, counts});
    const MleResult r = model.estimate(data, region);
    trace.rounds.push_back({B, counts, r.estimate, r.variance, r.at_edge || r.uninformative, r.degenerate, switched});
    if (std::abs(r.estimate) > 1e-12) B = region * r.estimate;
  };

  for (std::size_t k = 0; k < cfg.rounds; ++k) play_round(false);
  trace.converged = rounds_converged(trace.rounds);

  if (cfg.sign_switch && trace.converged) {
    region = -region;
    B = region * trace.rounds.back().estimate;
    play_round(true);
    const RoundRecord& extra = trace.rounds.back();
    trace.converged = !(extra.at_edge || extra.degenerate || !std::isfinite(extra.variance));
  }

  trace.non_convergence = !trace.converged;
  trace.final_estimate = trace.rounds.back().estimate;
  trace.final_variance = trace.rounds.back().variance;
  return trace;
}

std::vector<ProtocolTrace> run_ensemble(const ProtocolConfig& cfg, std::size_t runs, unsigned threads) {
  validate(cfg);
  const LikelihoodModel model(cfg.gamma, cfg.D, cfg.grid, cfg.quad);
  return run_ensemble(cfg, model, runs, threads);
}

std::vector<ProtocolTrace> run_ensemble(const ProtocolConfig& cfg, const LikelihoodModel& model, std::size_t runs,
                                        unsigned threads) {
  std::vector<ProtocolTrace> traces(runs);
  parallel_for(
      runs,
      [&](std::size_t i) {
        ProtocolConfig c = cfg;
        c.seed = cfg.seed + i;
        traces[i] = adaptive_run(c, model);
      },
      threads);
  return traces;
}

CrbReport crb_report(std::span<const ProtocolTrace> traces, const ProtocolConfig& cfg, const LikelihoodModel& model) {
  std::size_t depth = 0;
  for (const ProtocolTrace& t : traces) depth = std::max(depth, t.rounds.size());

  // bounds[t][k]: realized bound of trace t after round k.
  std::vector<std::vector<double>> bounds(traces.size());
  parallel_for(traces.size(), [&](std::size_t t) {
    double info = 0.0;
    for (const RoundRecord& r : traces[t].rounds) {
      info += static_cast<double>(cfg.shots) * model.fisher_j(cfg.J_true / r.B) / (r.B * r.B);
      bounds[t].push_back(info > 0.0 ? 1.0 / info : std::numeric_limits<double>::infinity());
    }
  });

  CrbReport report;
  for (std::size_t k = 0; k < depth; ++k) {
    std::vector<double> est;
    std::vector<double> bnd;
    std::vector<double> reported;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      if (k >= traces[t].rounds.size()) continue;
      est.push_back(traces[t].rounds[k].estimate);
      bnd.push_back(bounds[t][k]);
      reported.push_back(traces[t].rounds[k].variance);
    }
    CrbRound row;
    row.round = k + 1;
    row.samples = est.size();
    row.mean_estimate = std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(est.size());
    if (est.size() > 1) {
      double ss = 0.0;
      for (double e : est) ss += (e - row.mean_estimate) * (e - row.mean_estimate);
      row.empirical_variance = ss / static_cast<double>(est.size() - 1);
    }
    row.median_bound = median(bnd);
    row.median_reported = median(reported);
    row.bound_finite = std::isfinite(row.median_bound);
    row.ratio = row.bound_finite && row.median_bound > 0.0 ? row.empirical_variance / row.median_bound
                                                           : std::numeric_limits<double>::quiet_NaN();
    report.rounds.push_back(row);
  }
  return report;
}

std::string trace_to_jsonl(const ProtocolTrace& trace, const ProtocolConfig& cfg) {
  std::string out;
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const RoundRecord& r = trace.rounds[k];
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["round"] = k + 1;
    j["B"] = r.B;
    j["counts"] = {r.counts[0], r.counts[1], r.counts[2], r.counts[3]};
    j["estimate"] = r.estimate;
    j["variance"] = std::isfinite(r.variance) ? nlohmann::ordered_json(r.variance) : nlohmann::ordered_json(nullptr);
    j["at_edge"] = r.at_edge;
    j["degenerate"] = r.degenerate;
    j["sign_switched"] = r.sign_switched;
    j["converged"] = trace.converged;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace xychain
