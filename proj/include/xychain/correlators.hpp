#pragma once

#include <array>

#include "xychain/types.hpp"

namespace xychain {

/// Zero-temperature, thermodynamic-limit single-site magnetization and
/// nearest-neighbour correlators.
struct Correlators {
  double mz = 0.0;   // <sz_i>
  double gxx = 0.0;  // <sx_i sx_{i+1}> = G_{-1}
  double gyy = 0.0;  // <sy_i sy_{i+1}> = G_{+1}
  double gzz = 0.0;  // <sz_i sz_{i+1}> = mz^2 - G_{+1} G_{-1}
  /// 1 - mz, integrated directly. Near full polarization a-, c and b+ are
  /// orders of magnitude below 1 and are assembled from this field.
  double mz_defect = 1.0;
};

/// Same four fields, holding partial derivatives with respect to one parameter.
using CorrelatorDerivative = Correlators;

/// Correlators together with their derivatives along J, gamma and D.
struct CorrelatorJet {
  Correlators value;
  std::array<CorrelatorDerivative, 3> gradient;

  const CorrelatorDerivative& d(Param p) const { return gradient[static_cast<std::size_t>(p)]; }
};

/// Elements of the two-spin reduced density matrix in the computational
/// basis {|00>, |01>, |10>, |11>}:
///
///   | a+  0   0   b- |
///   | 0   c   b+  0  |
///   | 0   b+  c   0  |
///   | b-  0   0   a- |
struct TwoSpinXState {
  double a_plus = 0.0;
  double a_minus = 0.0;
  double b_plus = 0.0;
  double b_minus = 0.0;
  double c = 0.0;

  double trace() const { return a_plus + a_minus + 2.0 * c; }
};

/// Quasiparticle gap function
/// sqrt([J(cos phi - 2D sin phi) - 1]^2 + J^2 gamma^2 sin^2 phi).
double delta(const ChainParams& p, double phi);

/// True when the gap function has a zero on [0, pi], i.e. |J| = 1, or
/// gamma = 0 inside the gapless region. Correlator values stay finite there
/// but their parameter derivatives do not.
bool is_critical(const ChainParams& p);

double magnetization(const ChainParams& p, const QuadratureConfig& quad = {});

/// G_{sign} for nearest neighbours; sign must be +1 or -1.
double g_correlator(const ChainParams& p, int sign, const QuadratureConfig& quad = {});

Correlators correlators(const ChainParams& p, const QuadratureConfig& quad = {});

/// Derivatives of (mz, gxx, gyy, gzz) with respect to one parameter,
/// by differentiating the integrands. Throws CriticalPoint on the critical set.
CorrelatorDerivative d_correlators(const ChainParams& p, Param wrt,
                                   const QuadratureConfig& quad = {});

/// Values and all three gradients from a single 12-component quadrature pass.
CorrelatorJet correlator_jet(const ChainParams& p, const QuadratureConfig& quad = {});

/// Assembles the X-state from (mz_defect, gxx, gyy) and checks unit trace and
/// positivity to 1e-9.
/// Throws PositivityViolation otherwise.
TwoSpinXState x_state(const Correlators& corr);
TwoSpinXState x_state(const ChainParams& p, const QuadratureConfig& quad = {});

/// The X-state elements are affine in the correlators; this is the linear part,
/// mapping a correlator derivative onto the derivative of each element.
TwoSpinXState x_state_derivative(const CorrelatorDerivative& d);

}  // namespace xychain
