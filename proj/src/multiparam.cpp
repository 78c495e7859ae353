#include "xychain/multiparam.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

namespace xychain {

MultiparamPoint multiparam_point(const ChainParams& p, const QuadratureConfig& quad) {
  const CorrelatorJet jet = correlator_jet(p, quad);
  const Matrix4c rho = density_matrix(x_state(jet.value));

  std::array<Matrix4c, 3> L;
  for (std::size_t k = 0; k < 3; ++k) {
    const Matrix4c drho = density_matrix(x_state_derivative(jet.gradient[k]));
    L[k] = sld(rho, drho);
  }

  MultiparamPoint out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const std::complex<double> ab = (rho * L[a] * L[b]).trace();
      const std::complex<double> ba = (rho * L[b] * L[a]).trace();
      out.qfim.H(a, b) = 0.5 * (ab + ba).real();
      out.uhlmann.U(a, b) = a == b ? 0.0 : 0.5 * (ab - ba).imag();
    }
  }
  // Symmetrise away rounding so downstream eigen-analysis sees an exact form.
  out.qfim.H = 0.5 * (out.qfim.H + out.qfim.H.transpose()).eval();
  out.sloppiness = sloppiness(out.qfim);
  return out;
}

QfiMatrix qfi_matrix(const ChainParams& p, const QuadratureConfig& quad) {
  return multiparam_point(p, quad).qfim;
}

UhlmannMatrix uhlmann_matrix(const ChainParams& p, const QuadratureConfig& quad) {
  return multiparam_point(p, quad).uhlmann;
}

SloppinessReport qfim_det(const ChainParams& p, const QuadratureConfig& quad) {
  return multiparam_point(p, quad).sloppiness;
}

SloppinessReport sloppiness(const QfiMatrix& m) {
  SloppinessReport r;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m.H, Eigen::EigenvaluesOnly);
  for (int i = 0; i < 3; ++i) r.eigenvalues[i] = eig.eigenvalues()(i);
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), std::greater<>());
  r.det = r.eigenvalues[0] * r.eigenvalues[1] * r.eigenvalues[2];
  r.condition = r.eigenvalues[0] > 0.0 ? r.eigenvalues[2] / r.eigenvalues[0] : 0.0;
  const double scale = m.H.diagonal().maxCoeff();
  r.relative_det = scale > 0.0 ? r.det / (scale * scale * scale) : 0.0;
  r.near_singular = r.relative_det < kSingularRelativeDet;
  return r;
}

std::optional<Eigen::Matrix3d> qfim_inverse(const QfiMatrix& m) {
  const SloppinessReport r = sloppiness(m);
  if (!(r.condition >= kInversionConditionFloor)) return std::nullopt;
  return m.H.inverse();
}

}  // namespace xychain
