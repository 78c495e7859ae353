#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "xychain/fisher.hpp"
#include "xychain/types.hpp"

namespace xychain {

/// Indices follow Param: 0 = J, 1 = gamma, 2 = D.
struct QfiMatrix {
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();

  double operator()(Param a, Param b) const {
    return H(static_cast<int>(a), static_cast<int>(b));
  }
};

/// Tr[rho (L_a L_b - L_b L_a) / 2] is purely imaginary for Hermitian SLDs;
/// U holds its imaginary part, so U is real antisymmetric.
struct UhlmannMatrix {
  Eigen::Matrix3d U = Eigen::Matrix3d::Zero();

  double magnitude(Param a, Param b) const {
    return std::abs(U(static_cast<int>(a), static_cast<int>(b)));
  }
  double max_magnitude() const { return U.cwiseAbs().maxCoeff(); }
};

inline constexpr double kSingularRelativeDet = 1e-5;
inline constexpr double kInversionConditionFloor = 1e-10;

struct SloppinessReport {
  double det = 0.0;
  std::array<double, 3> eigenvalues{};  // descending
  double condition = 0.0;               // smallest / largest eigenvalue
  double relative_det = 0.0;            // det / (largest diagonal entry)^3
  bool near_singular = false;           // relative_det < kSingularRelativeDet
};

struct MultiparamPoint {
  QfiMatrix qfim;
  UhlmannMatrix uhlmann;
  SloppinessReport sloppiness;
};

/// QFIM and Uhlmann matrix from the three SLDs of one state.
MultiparamPoint multiparam_point(const ChainParams& p, const QuadratureConfig& quad = {});

QfiMatrix qfi_matrix(const ChainParams& p, const QuadratureConfig& quad = {});
UhlmannMatrix uhlmann_matrix(const ChainParams& p, const QuadratureConfig& quad = {});
SloppinessReport qfim_det(const ChainParams& p, const QuadratureConfig& quad = {});

SloppinessReport sloppiness(const QfiMatrix& m);

/// H^{-1}, or nullopt when the spectrum is too ill-conditioned to invert.
std::optional<Eigen::Matrix3d> qfim_inverse(const QfiMatrix& m);

}  // namespace xychain
