#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "xychain/correlators.hpp"
#include "xychain/types.hpp"

namespace xychain {

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;

/// Four-vectors of the two commuting X-state blocks. The {|00>,|11>} block is
/// (omega0 + omega1 sx + omega3 sz) / 2 and the {|01>,|10>} block is
/// (tilde0 + tilde1 sx) / 2. Components 2 (and tilde 3) vanish identically.
struct BlochBlocks {
  std::array<double, 4> omega{};
  std::array<double, 4> omega_tilde{};
};

/// g_ab x^a y^b with g = diag(1, -1, -1, -1).
double minkowski(const std::array<double, 4>& x, const std::array<double, 4>& y);

BlochBlocks bloch_blocks(const TwoSpinXState& state);
BlochBlocks bloch_blocks(const Correlators& corr);
/// Derivative of the blocks; the constant parts drop out.
BlochBlocks bloch_blocks_derivative(const CorrelatorDerivative& d);

Matrix4c density_matrix(const TwoSpinXState& state);

/// Fisher information of the sz x sz measurement, outcomes (a+, c, c, a-).
struct MagnetizationFi {
  double value = 0.0;
  bool divergent = false;  // an outcome with p < 1e-12 still moves (|dp| > 1e-8)
};

MagnetizationFi magnetization_fi(const TwoSpinXState& state, const TwoSpinXState& dstate);
MagnetizationFi magnetization_fi(const ChainParams& p, Param wrt, const QuadratureConfig& quad = {});

/// Quantum Fisher information split over the two X-state blocks.
struct BlockQfi {
  double total = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  bool block1_degenerate = false;  // pure or vanishing block, limit formula used
  bool block2_degenerate = false;
};

BlockQfi qfi_xstate(const BlochBlocks& blocks, const BlochBlocks& dblocks);
BlockQfi qfi_xstate(const ChainParams& p, Param wrt, const QuadratureConfig& quad = {});

inline constexpr double kSupportTol = 1e-12;

/// Symmetric logarithmic derivative on the support of rho: in the eigenbasis,
/// L_ij = 2 <i|drho|j> / (p_i + p_j) whenever p_i + p_j > tol, else 0.
Matrix4c sld(const Matrix4c& rho, const Matrix4c& drho, double tol = kSupportTol);

/// sum_{ij: p_i + p_j > tol} 2 |<i|drho|j>|^2 / (p_i + p_j).
double qfi_eigen(const Matrix4c& rho, const Matrix4c& drho, double tol = kSupportTol);

struct Saturation {
  double value = 0.0;
  bool from_limit = false;  // evaluated as the ratio at params +- 1e-4
  bool undefined = false;   // limit unstable beyond 1e-3 (value is NaN)
};

struct FisherPoint {
  double F = 0.0;
  double H = 0.0;
  double H1 = 0.0;
  double H2 = 0.0;
  Saturation S;
  bool divergent = false;
  bool block_degenerate = false;
};

/// F, H and S for one parameter. Uses the support convention at rank-deficient
/// states, where F and H are discontinuous; S then falls back to its limit.
FisherPoint fisher_point(const ChainParams& p, Param wrt, const QuadratureConfig& quad = {});

Saturation saturation(const ChainParams& p, Param wrt, const QuadratureConfig& quad = {});

}  // namespace xychain
