#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xychain/types.hpp"

namespace xychain {

/// Outcomes of sz x sz on the two spins, in the order up-up, up-down,
/// down-up, down-down, i.e. probabilities (a+, c, c, a-).
using Probabilities = std::array<double, 4>;
using Counts = std::array<std::uint64_t, 4>;

Probabilities outcome_probabilities(const ChainParams& effective, const QuadratureConfig& quad = {});

/// Multinomial draw by sequential conditional binomials.
Counts sample_outcomes(const Probabilities& probs, std::uint64_t shots, std::mt19937_64& rng);
Counts sample_outcomes(const Probabilities& probs, std::uint64_t shots, std::uint64_t seed);

/// Uniform grid over the effective coupling j = J / B.
struct CouplingGrid {
  double lo = 0.05;
  double hi = 3.0;
  std::size_t points = 600;

  double at(std::size_t i) const {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
};

/// One measurement batch taken with field B.
struct RoundData {
  double B = 1.0;
  Counts counts{};
};

struct MleResult {
  double estimate = 0.0;  // J = j * B of the latest round
  double variance = 0.0;  // 1 / sum_i M_i F_j(J/B_i) / B_i^2
  bool at_edge = false;
  bool degenerate = false;  // flat likelihood plateau, estimate is its midpoint
  bool uninformative = false;  // zero Fisher information at the estimate
};

/// Multinomial likelihood of the two-spin magnetization data at fixed
/// (gamma, D). Caches outcome probabilities over +-grid; immutable after
/// construction and safe to share across threads.
class LikelihoodModel {
 public:
  LikelihoodModel(double gamma, double D, CouplingGrid grid, QuadratureConfig quad = {});

  double gamma() const { return gamma_; }
  double D() const { return D_; }
  const CouplingGrid& grid() const { return grid_; }
  const QuadratureConfig& quad() const { return quad_; }

  /// Exact probabilities at effective coupling j.
  Probabilities probabilities(double j) const;

  /// Magnetization Fisher information per shot with respect to j. Evaluated
  /// at +-(1 - 1e-3) when |j| is within 1e-9 of the critical value 1.
  double fisher_j(double j) const;

  /// Joint log-likelihood of J over all rounds; exact evaluation.
  double log_likelihood(double J, std::span<const RoundData> rounds) const;

  /// Maximum-likelihood estimate of J from all rounds. Candidates are
  /// j * B_last for j in sign * [lo, hi]; the grid maximum is refined by
  /// golden-section search.
  MleResult estimate(std::span<const RoundData> rounds, int sign) const;

 private:
  // Cached log-probabilities, linearly interpolated between grid nodes.
  double interpolated_log_likelihood(double J, std::span<const RoundData> rounds) const;
  std::array<double, 4> log_probabilities(double j) const;

  double gamma_;
  double D_;
  CouplingGrid grid_;
  QuadratureConfig quad_;
  std::vector<std::array<double, 4>> log_table_pos_;
  std::vector<std::array<double, 4>> log_table_neg_;
};

/// Single-round estimator over an explicit signed grid of effective couplings
/// (lo < hi, both of one sign).
MleResult mle_estimate(const Counts& counts, double B, double gamma, double D, const CouplingGrid& grid,
                       const QuadratureConfig& quad = {});

struct ProtocolConfig {
  double J_true = 0.9;
  double gamma = 1.0;
  double D = 0.0;
  double J_guess = 0.9;
  std::uint64_t shots = 10000;
  std::size_t rounds = 3;
  CouplingGrid grid{};
  std::uint64_t seed = 1;
  bool sign_switch = false;
  /// +1: B = J_av so that j = J/B ~ +1; -1: B = -J_av, working at j ~ -1.
  int region = 1;
  QuadratureConfig quad{};
};

/// Throws InvalidArgument on an unusable configuration.
void validate(const ProtocolConfig& cfg);

struct RoundRecord {
  double B = 0.0;
  Counts counts{};
  double estimate = 0.0;  // J_av,k, pooled over rounds 1..k
  double variance = 0.0;
  bool at_edge = false;
  bool degenerate = false;
  bool sign_switched = false;
};

struct ProtocolTrace {
  std::vector<RoundRecord> rounds;
  bool converged = false;
  bool non_convergence = false;  // == !converged, kept as the user-facing flag
  double final_estimate = 0.0;
  double final_variance = 0.0;
};

ProtocolTrace adaptive_run(const ProtocolConfig& cfg);
ProtocolTrace adaptive_run(const ProtocolConfig& cfg, const LikelihoodModel& model);

/// Runs seeds cfg.seed, cfg.seed + 1, ... in parallel; output ordered by seed.
std::vector<ProtocolTrace> run_ensemble(const ProtocolConfig& cfg, std::size_t runs, unsigned threads = 0);
std::vector<ProtocolTrace> run_ensemble(const ProtocolConfig& cfg, const LikelihoodModel& model,
                                        std::size_t runs, unsigned threads = 0);

struct CrbRound {
  std::size_t round = 0;
  std::size_t samples = 0;
  double mean_estimate = 0.0;
  double empirical_variance = 0.0;  // across runs
  double median_bound = 0.0;        // median over runs of 1/sum_i M F_J(J_true; B_i)
  double median_reported = 0.0;     // median of the estimator's own variance
  double ratio = 0.0;               // empirical_variance / median_bound
  bool bound_finite = true;
};

struct CrbReport {
  std::vector<CrbRound> rounds;
};

/// Compares the spread of J_av,k across runs with the Cramer-Rao bound at the
/// true coupling under each run's own field sequence.
CrbReport crb_report(std::span<const ProtocolTrace> traces, const ProtocolConfig& cfg,
                     const LikelihoodModel& model);

/// One JSON object per round (JSON lines).
std::string trace_to_jsonl(const ProtocolTrace& trace, const ProtocolConfig& cfg);

}  // namespace xychain
