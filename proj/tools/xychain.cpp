// Command-line driver: single-point evaluations, sweeps, the adaptive
// estimation protocol, DM feature detection and figure data bundles.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xychain/correlators.hpp"
#include "xychain/error.hpp"
#include "xychain/features.hpp"
#include "xychain/figures.hpp"
#include "xychain/fisher.hpp"
#include "xychain/multiparam.hpp"
#include "xychain/protocol.hpp"
#include "xychain/sweep.hpp"

using namespace xychain;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Common {
  double J = 0.5;
  double gamma = 1.0;
  double D = 0.0;
  double tol = 1e-10;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;

  ChainParams params() const { return {J, gamma, D}; }
  QuadratureConfig quad() const {
    QuadratureConfig q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    return q;
  }
};

void add_point_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--J", c.J, "coupling in units of the field");
  cmd->add_option("--gamma", c.gamma, "anisotropy in [-1, 1]");
  cmd->add_option("--D", c.D, "DM interaction strength");
}

void add_output_flags(CLI::App* cmd, Common& c, bool with_format) {
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  if (with_format) cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--tol", c.tol, "quadrature absolute and relative tolerance")->check(CLI::PositiveNumber);
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + c.out);
  os << text;
}

std::string number(double x) { return format_double(x); }

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Flat key/value records become a one-row CSV or a JSON object.
std::string render(const Common& c, const std::vector<std::pair<std::string, double>>& kv, const json& extra = {}) {
  if (c.format == "csv") {
    std::string head, row;
    for (std::size_t i = 0; i < kv.size(); ++i) {
      head += (i ? "," : "") + kv[i].first;
      row += (i ? "," : "") + number(kv[i].second);
    }
    return head + "\n" + row + "\n";
  }
  json j;
  for (const auto& [k, v] : kv) j[k] = jnum(v);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j.dump(2) + "\n";
}

std::vector<Param> parse_params(const std::vector<std::string>& names) {
  std::vector<Param> out;
  for (const std::string& n : names) {
    if (n == "all") return {kAllParams.begin(), kAllParams.end()};
    const auto p = parse_param(n);
    if (!p) throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + n + "' (J, gamma, D or all)");
    out.push_back(*p);
  }
  return out;
}

int run_state(const Common& c) {
  const ChainParams p = c.params();
  validate(p);
  const Correlators corr = correlators(p, c.quad());
  const TwoSpinXState s = x_state(corr);
  const BlochBlocks b = bloch_blocks(corr);
  std::vector<std::pair<std::string, double>> kv{
      {"J", p.J},           {"gamma", p.gamma},       {"D", p.D},         {"mz", corr.mz},
      {"gxx", corr.gxx},    {"gyy", corr.gyy},       {"gzz", corr.gzz},  {"a_plus", s.a_plus},
      {"a_minus", s.a_minus}, {"b_plus", s.b_plus},  {"b_minus", s.b_minus}, {"c", s.c},
      {"omega0", b.omega[0]}, {"omega1", b.omega[1]}, {"omega3", b.omega[3]},
      {"omega_tilde0", b.omega_tilde[0]}, {"omega_tilde1", b.omega_tilde[1]}};
  json extra;
  extra["critical"] = is_critical(p);
  emit(c, render(c, kv, extra));
  return 0;
}

int run_fisher(const Common& c, const std::vector<std::string>& wrt_names) {
  const ChainParams p = c.params();
  validate(p);
  const std::vector<Param> wrt = parse_params(wrt_names);
  std::vector<std::pair<std::string, double>> kv{{"J", p.J}, {"gamma", p.gamma}, {"D", p.D}};
  json extra;
  for (Param w : wrt) {
    const FisherPoint fp = fisher_point(p, w, c.quad());
    const std::string sfx = "_" + std::string(to_string(w));
    kv.insert(kv.end(), {{"F" + sfx, fp.F}, {"H" + sfx, fp.H}, {"H1" + sfx, fp.H1}, {"H2" + sfx, fp.H2},
                         {"S" + sfx, fp.S.value}});
    extra["flags" + sfx] = {{"divergent", fp.divergent},
                            {"block_degenerate", fp.block_degenerate},
                            {"saturation_from_limit", fp.S.from_limit},
                            {"saturation_undefined", fp.S.undefined}};
  }
  emit(c, render(c, kv, extra));
  return 0;
}

int run_sweep(const Common& c, const std::string& axis, const std::string& range,
              const std::vector<std::string>& quantity_names, const std::vector<std::string>& wrt_names) {
  SweepSpec spec;
  const auto ax = parse_param(axis);
  if (!ax) throw Error(ErrorKind::InvalidArgument, "unknown axis '" + axis + "'");
  spec.axis = *ax;
  spec.range = parse_range(range);
  spec.fixed = c.params();
  spec.quantities.clear();
  for (const std::string& q : quantity_names) {
    const auto parsed = parse_quantity(q);
    if (!parsed) throw Error(ErrorKind::InvalidArgument, "unknown quantity '" + q + "' (F, H, S, QFIM, U, det)");
    spec.quantities.push_back(*parsed);
  }
  spec.wrt = parse_params(wrt_names);
  spec.quad = c.quad();
  spec.threads = c.threads;
  const SweepTable table = sweep(spec);
  for (const std::string& w : table.warnings) std::cerr << "warning: " << w << "\n";
  emit(c, c.format == "csv" ? to_csv(table) : to_json(table).dump(2) + "\n");
  return 0;
}

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int a = 0; a < 3; ++a) rows.push_back({jnum(m(a, 0)), jnum(m(a, 1)), jnum(m(a, 2))});
  return rows;
}

int run_qfim(const Common& c) {
  const ChainParams p = c.params();
  validate(p);
  const MultiparamPoint mp = multiparam_point(p, c.quad());
  if (c.format == "csv") {
    std::vector<std::pair<std::string, double>> kv{{"J", p.J}, {"gamma", p.gamma}, {"D", p.D}};
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a; b < 3; ++b) {
        kv.emplace_back("H_" + std::string(to_string(kAllParams[a])) + "_" + std::string(to_string(kAllParams[b])),
                        mp.qfim.H(static_cast<int>(a), static_cast<int>(b)));
      }
    }
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        kv.emplace_back("U_" + std::string(to_string(kAllParams[a])) + "_" + std::string(to_string(kAllParams[b])),
                        std::abs(mp.uhlmann.U(static_cast<int>(a), static_cast<int>(b))));
      }
    }
    kv.insert(kv.end(), {{"det", mp.sloppiness.det},
                         {"det_relative", mp.sloppiness.relative_det},
                         {"eig_ratio", mp.sloppiness.condition}});
    emit(c, render(c, kv));
    return 0;
  }
  json j;
  j["params"] = {{"J", p.J}, {"gamma", p.gamma}, {"D", p.D}};
  j["order"] = {"J", "gamma", "D"};
  j["qfim"] = matrix_json(mp.qfim.H);
  j["uhlmann_magnitude"] = matrix_json(mp.uhlmann.U.cwiseAbs());
  j["det"] = jnum(mp.sloppiness.det);
  j["eigenvalues"] = {jnum(mp.sloppiness.eigenvalues[0]), jnum(mp.sloppiness.eigenvalues[1]),
                      jnum(mp.sloppiness.eigenvalues[2])};
  j["eig_ratio"] = jnum(mp.sloppiness.condition);
  j["det_relative"] = jnum(mp.sloppiness.relative_det);
  j["near_singular"] = mp.sloppiness.near_singular;
  const auto inv = qfim_inverse(mp.qfim);
  j["inverse"] = inv ? matrix_json(*inv) : json(nullptr);
  emit(c, j.dump(2) + "\n");
  return 0;
}

int run_protocol(const Common& c, ProtocolConfig cfg, const std::string& grid, std::size_t runs) {
  cfg.J_true = c.J;
  cfg.gamma = c.gamma;
  cfg.D = c.D;
  cfg.quad = c.quad();
  const Range g = parse_range(grid);
  cfg.grid = {g.lo, g.hi, g.points};
  validate(cfg);
  const LikelihoodModel model(cfg.gamma, cfg.D, cfg.grid, cfg.quad);
  if (runs <= 1) {
    emit(c, trace_to_jsonl(adaptive_run(cfg, model), cfg));
    return 0;
  }
  const std::vector<ProtocolTrace> traces = run_ensemble(cfg, model, runs, c.threads);
  std::string text;
  std::size_t converged = 0;
  for (const ProtocolTrace& t : traces) {
    text += trace_to_jsonl(t, cfg);
    converged += t.converged ? 1 : 0;
  }
  const CrbReport crb = crb_report(traces, cfg, model);
  json summary;
  summary["summary"] = true;
  summary["runs"] = runs;
  summary["converged"] = converged;
  json rounds = json::array();
  for (const CrbRound& r : crb.rounds) {
    rounds.push_back({{"round", r.round},
                      {"samples", r.samples},
                      {"mean_estimate", jnum(r.mean_estimate)},
                      {"empirical_variance", jnum(r.empirical_variance)},
                      {"median_bound", jnum(r.median_bound)},
                      {"median_reported_variance", jnum(r.median_reported)},
                      {"ratio", jnum(r.ratio)},
                      {"bound_attainable", r.bound_finite}});
  }
  summary["crb"] = rounds;
  text += summary.dump() + "\n";
  emit(c, text);
  return 0;
}

int run_features(const Common& c, const std::vector<double>& Ds, double d_max, std::size_t points, bool loss,
                 const std::string& loss_range, std::size_t j_points) {
  json j;
  const FeatureReport report = feature_report(c.gamma, Ds, d_max, points, c.quad());
  j["features"] = to_json(report);
  if (loss) {
    const Range r = parse_range(loss_range);
    j["loss"] = to_json(detect_d_loss(c.gamma, r.lo, r.hi, r.points, j_points, c.quad()));
  }
  emit(c, j.dump(2) + "\n");
  return 0;
}

int run_figure(const Common& c, const std::string& name) {
  const std::string dir = c.out.empty() ? "." : c.out;
  const std::vector<std::string> names = name == "all" ? figure_names() : std::vector<std::string>{name};
  for (const std::string& n : names) {
    const FigureBundle b = figure_bundle(n, c.quad(), c.threads);
    for (const auto& path : write_bundle(b, dir)) std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum and classical Fisher information of the anisotropic XY chain with DM interaction"};
  app.set_version_flag("--version", std::string(XYCHAIN_VERSION));
  app.require_subcommand(1);

  Common c;
  app.add_option("--threads", c.threads, "worker threads (0: all cores)");

  auto* state = app.add_subcommand("state", "correlators, two-spin X-state and Bloch blocks");
  add_point_flags(state, c);
  add_output_flags(state, c, true);

  std::vector<std::string> wrt{"J"};
  auto* fisher = app.add_subcommand("fisher", "magnetization FI, QFI and saturation");
  add_point_flags(fisher, c);
  add_output_flags(fisher, c, true);
  fisher->add_option("--wrt", wrt, "J, gamma, D or all");

  std::string axis = "J";
  std::string range = "-2:2:401";
  std::vector<std::string> quantities{"F", "H", "S"};
  auto* sw = app.add_subcommand("sweep", "tabulate quantities along one parameter axis");
  add_point_flags(sw, c);
  add_output_flags(sw, c, true);
  sw->add_option("--axis", axis, "J, gamma or D");
  sw->add_option("--range", range, "lo:hi:n");
  sw->add_option("--quantities", quantities, "F H S QFIM U det")->delimiter(',');
  sw->add_option("--wrt", wrt, "J, gamma, D or all")->delimiter(',');

  auto* qfim = app.add_subcommand("qfim", "3x3 QFI matrix, Uhlmann magnitudes and sloppiness");
  add_point_flags(qfim, c);
  add_output_flags(qfim, c, true);

  ProtocolConfig cfg;
  std::string grid = "0.05:3:600";
  std::size_t runs = 1;
  auto* proto = app.add_subcommand("protocol", "simulate the adaptive estimation of J (JSON lines)");
  add_point_flags(proto, c);
  add_output_flags(proto, c, false);
  proto->add_option("--J-guess", cfg.J_guess, "initial guess; the first field is B = region * J_guess")->required();
  proto->add_option("--shots", cfg.shots, "measurements per round")->check(CLI::PositiveNumber);
  proto->add_option("--rounds", cfg.rounds, "adaptive rounds")->check(CLI::PositiveNumber);
  proto->add_option("--seed", cfg.seed, "RNG seed")->required();
  proto->add_option("--region", cfg.region, "+1 works near J/B = 1, -1 near J/B = -1")->check(CLI::IsMember({-1, 1}));
  proto->add_flag("--sign-switch", cfg.sign_switch, "add one round in the opposite region after convergence");
  proto->add_option("--grid", grid, "estimator grid over |J/B| as lo:hi:n");
  proto->add_option("--runs", runs, "independent runs with seeds seed, seed+1, ...; adds a CRB summary");

  std::vector<double> ds{0.0, 0.02, 0.1, 0.2, 0.3};
  double d_max = 0.3;
  std::size_t points = kMinFeaturePoints;
  bool loss = false;
  std::string loss_range = "0:0.3:13";
  std::size_t j_points = 161;
  auto* feat = app.add_subcommand("features", "bump/peak classification and D thresholds on -1 < J < 0");
  add_point_flags(feat, c);
  add_output_flags(feat, c, false);
  feat->add_option("--Ds", ds, "D values to classify")->delimiter(',');
  feat->add_option("--d-max", d_max, "upper end of the threshold search");
  feat->add_option("--points", points, "samples on the window (>= 200)");
  feat->add_flag("--loss", loss, "also locate D_loss from the integral of H over 1.2 <= J <= 2");
  feat->add_option("--loss-range", loss_range, "D grid for D_loss as lo:hi:n");
  feat->add_option("--loss-points", j_points, "J samples of the D_loss integral");

  std::string figure_name;
  auto* fig = app.add_subcommand("figure", "write figure data (CSV) and a JSON manifest into --out");
  fig->add_option("name", figure_name, "fig1..fig6 or all")->required();
  add_output_flags(fig, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*state) return run_state(c);
    if (*fisher) return run_fisher(c, wrt);
    if (*sw) return run_sweep(c, axis, range, quantities, wrt);
    if (*qfim) return run_qfim(c);
    if (*proto) return run_protocol(c, cfg, grid, runs);
    if (*feat) return run_features(c, ds, d_max, points, loss, loss_range, j_points);
    if (*fig) return run_figure(c, figure_name);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidArgument ? kExitInvalid : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
