#include "xychain/fisher.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "xychain/error.hpp"

namespace xychain {
namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kProbSlope = 1e-8;
constexpr double kBlockFloor = 1e-14;
constexpr double kLimitStep = 1e-4;
constexpr double kLimitAgreement = 1e-3;

double block_qfi(const std::array<double, 4>& w, const std::array<double, 4>& dw, bool& degenerate) {
  const double w0 = w[0];
  if (w0 < kBlockFloor) {
    // Vanishing block: a PSD block at zero trace can only have zero first derivative.
    degenerate = true;
    return 0.0;
  }
  const double norm = minkowski(w, w);
  if (norm >= kBlockFloor * w0 * w0) {
    degenerate = false;
    const double cross = minkowski(w, dw);
    return (cross * cross / norm - minkowski(dw, dw)) / w0 + dw[0] * dw[0] / w0;
  }

  // Pure block: keep the populated eigenvalue and the coherences towards the
  // empty one, drop the (dp)^2/p term of the empty eigenvalue.
  degenerate = true;
  const double len = std::sqrt(w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);
  const std::array<double, 3> n{w[1] / len, w[2] / len, w[3] / len};
  const double along = n[0] * dw[1] + n[1] * dw[2] + n[2] * dw[3];
  double perp2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double t = dw[k + 1] - along * n[k];
    perp2 += t * t;
  }
  const double head = dw[0] + along;
  return head * head / (4.0 * w0) + perp2 / w0;
}

struct RawPoint {
  double F = 0.0;
  BlockQfi H;
  bool divergent = false;
  bool rank_deficient = false;
};

RawPoint raw_point(const CorrelatorJet& jet, Param wrt) {
  const TwoSpinXState state = x_state(jet.value);
  const TwoSpinXState dstate = x_state_derivative(jet.d(wrt));
  RawPoint out;
  const MagnetizationFi fi = magnetization_fi(state, dstate);
  out.F = fi.value;
  out.divergent = fi.divergent;
  out.H = qfi_xstate(bloch_blocks(jet.value), bloch_blocks_derivative(jet.d(wrt)));
  out.rank_deficient = state.a_plus < kProbFloor || state.a_minus < kProbFloor || state.c < kProbFloor;
  return out;
}

// Ratio at a regular point, NaN otherwise.
double regular_ratio(const RawPoint& r) {
  if (r.divergent || r.rank_deficient || !(r.H.total > kProbFloor)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return r.F / r.H.total;
}

Saturation saturation_from(const ChainParams& p, Param wrt, const QuadratureConfig& quad,
                           const RawPoint& here) {
  Saturation s;
  const double direct = regular_ratio(here);
  if (!std::isnan(direct)) {
    s.value = direct;
    return s;
  }
  s.from_limit = true;
  const double x = get(p, wrt);
  double side[2];
  const double steps[2] = {-kLimitStep, kLimitStep};
  for (int k = 0; k < 2; ++k) {
    const ChainParams q = with(p, wrt, x + steps[k]);
    try {
      validate(q);
      side[k] = regular_ratio(raw_point(correlator_jet(q, quad), wrt));
    } catch (const Error&) {
      side[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (std::isnan(side[0]) || std::isnan(side[1]) ||
      std::abs(side[0] - side[1]) > kLimitAgreement) {
    s.undefined = true;
    s.value = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.value = 0.5 * (side[0] + side[1]);
  return s;
}

}  // namespace

double minkowski(const std::array<double, 4>& x, const std::array<double, 4>& y) {
  return x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
}

BlochBlocks bloch_blocks(const TwoSpinXState& s) {
  BlochBlocks b;
  b.omega = {s.a_plus + s.a_minus, 2.0 * s.b_minus, 0.0, s.a_plus - s.a_minus};
  b.omega_tilde = {2.0 * s.c, 2.0 * s.b_plus, 0.0, 0.0};
  return b;
}

BlochBlocks bloch_blocks(const Correlators& c) {
  BlochBlocks b;
  b.omega = {0.5 * (1.0 + c.gzz), 0.5 * (c.gxx - c.gyy), 0.0, c.mz};
  const double one_minus_gzz = c.mz_defect * (2.0 - c.mz_defect) + c.gxx * c.gyy;
  b.omega_tilde = {0.5 * one_minus_gzz, 0.5 * (c.gxx + c.gyy), 0.0, 0.0};
  return b;
}

BlochBlocks bloch_blocks_derivative(const CorrelatorDerivative& d) {
  BlochBlocks b;
  b.omega = {0.5 * d.gzz, 0.5 * (d.gxx - d.gyy), 0.0, d.mz};
  b.omega_tilde = {-0.5 * d.gzz, 0.5 * (d.gxx + d.gyy), 0.0, 0.0};
  return b;
}

Matrix4c density_matrix(const TwoSpinXState& s) {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = s.a_plus;
  m(3, 3) = s.a_minus;
  m(0, 3) = m(3, 0) = s.b_minus;
  m(1, 1) = m(2, 2) = s.c;
  m(1, 2) = m(2, 1) = s.b_plus;
  return m;
}

MagnetizationFi magnetization_fi(const TwoSpinXState& s, const TwoSpinXState& ds) {
  MagnetizationFi out;
  auto term = [&](double p, double dp, double multiplicity) {
    if (p < kProbFloor) {
      if (std::abs(dp) > kProbSlope) out.divergent = true;
      return;
    }
    out.value += multiplicity * dp * dp / p;
  };
  term(s.a_plus, ds.a_plus, 1.0);
  term(s.c, ds.c, 2.0);
  term(s.a_minus, ds.a_minus, 1.0);
  if (out.divergent) out.value = std::numeric_limits<double>::infinity();
  return out;
}

MagnetizationFi magnetization_fi(const ChainParams& p, Param wrt, const QuadratureConfig& quad) {
  const CorrelatorJet jet = correlator_jet(p, quad);
  return magnetization_fi(x_state(jet.value), x_state_derivative(jet.d(wrt)));
}

BlockQfi qfi_xstate(const BlochBlocks& b, const BlochBlocks& db) {
  BlockQfi out;
  out.h1 = block_qfi(b.omega, db.omega, out.block1_degenerate);
  out.h2 = block_qfi(b.omega_tilde, db.omega_tilde, out.block2_degenerate);
  out.total = out.h1 + out.h2;
  return out;
}

BlockQfi qfi_xstate(const ChainParams& p, Param wrt, const QuadratureConfig& quad) {
  const CorrelatorJet jet = correlator_jet(p, quad);
  x_state(jet.value);  // positivity gate
  return qfi_xstate(bloch_blocks(jet.value), bloch_blocks_derivative(jet.d(wrt)));
}

Matrix4c sld(const Matrix4c& rho, const Matrix4c& drho, double tol) {
  const Eigen::SelfAdjointEigenSolver<Matrix4c> eig(rho);
  const auto& p = eig.eigenvalues();
  const Matrix4c& V = eig.eigenvectors();
  const Matrix4c d = V.adjoint() * drho * V;
  Matrix4c L = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double sum = p(i) + p(j);
      if (sum > tol) L(i, j) = 2.0 * d(i, j) / sum;
    }
  }
  return V * L * V.adjoint();
}

double qfi_eigen(const Matrix4c& rho, const Matrix4c& drho, double tol) {
  const Eigen::SelfAdjointEigenSolver<Matrix4c> eig(rho);
  const auto& p = eig.eigenvalues();
  const Matrix4c& V = eig.eigenvectors();
  const Matrix4c d = V.adjoint() * drho * V;
  double h = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double sum = p(i) + p(j);
      if (sum > tol) h += 2.0 * std::norm(d(i, j)) / sum;
    }
  }
  return h;
}

FisherPoint fisher_point(const ChainParams& p, Param wrt, const QuadratureConfig& quad) {
  const CorrelatorJet jet = correlator_jet(p, quad);
  const RawPoint raw = raw_point(jet, wrt);
  FisherPoint fp;
  fp.F = raw.F;
  fp.H = raw.H.total;
  fp.H1 = raw.H.h1;
  fp.H2 = raw.H.h2;
  fp.divergent = raw.divergent;
  fp.block_degenerate = raw.H.block1_degenerate || raw.H.block2_degenerate;
  fp.S = saturation_from(p, wrt, quad, raw);
  return fp;
}

Saturation saturation(const ChainParams& p, Param wrt, const QuadratureConfig& quad) {
  return fisher_point(p, wrt, quad).S;
}

}  // namespace xychain
