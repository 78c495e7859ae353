#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xychain/correlators.hpp"
#include "xychain/fisher.hpp"

using namespace xychain;

namespace {

const QuadratureConfig kTight{1e-13, 1e-13, 8192};

Matrix4c drho_of(const ChainParams& p, Param wrt) {
  return density_matrix(x_state_derivative(d_correlators(p, wrt)));
}

double qfi_by_eigen(const ChainParams& p, Param wrt) {
  return qfi_eigen(density_matrix(x_state(p)), drho_of(p, wrt));
}

// A random valid X-state: positive blocks built from random Bloch vectors.
TwoSpinXState random_xstate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double w0 = u(rng);
  const double r1 = w0 * u(rng);
  const double th = 2.0 * oracle::pi * u(rng);
  const double wt0 = 1.0 - w0;
  const double rt = wt0 * (2.0 * u(rng) - 1.0);
  TwoSpinXState s;
  s.a_plus = 0.5 * (w0 + r1 * std::cos(th));
  s.a_minus = 0.5 * (w0 - r1 * std::cos(th));
  s.b_minus = 0.5 * r1 * std::sin(th);
  s.c = 0.5 * wt0;
  s.b_plus = 0.5 * rt;
  return s;
}

TwoSpinXState random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  TwoSpinXState d;
  d.a_plus = n(rng);
  d.a_minus = n(rng);
  d.c = -0.5 * (d.a_plus + d.a_minus);  // traceless
  d.b_plus = n(rng);
  d.b_minus = n(rng);
  return d;
}

}  // namespace

TEST_CASE("magnetization Fisher information") {
  CHECK(magnetization_fi({0.3, 0.0, 0.0}, Param::J).value == doctest::Approx(0.0));
  CHECK(magnetization_fi({0.999, 0.2, 0.0}, Param::J).value > 10.0 * magnetization_fi({0.5, 0.2, 0.0}, Param::J).value);

  // Generic definition over the four outcome probabilities.
  const ChainParams p{0.5, 0.7, 0.1};
  for (Param w : kAllParams) {
    const std::function<std::array<double, 4>(double)> probs = [&](double x) {
      const TwoSpinXState s = x_state(with(p, w, x), kTight);
      return std::array<double, 4>{s.a_plus, s.c, s.c, s.a_minus};
    };
    const double ref = oracle::generic_fi<4>(probs, get(p, w), 1e-3);
    CHECK(magnetization_fi(p, w).value == doctest::Approx(ref).epsilon(1e-5));
  }
}

TEST_CASE("magnetization FI at vanishing outcome probabilities") {
  // J = 0: a- = c = 0 with vanishing slope in J at gamma = 0.
  const MagnetizationFi quiet = magnetization_fi({0.0, 0.0, 0.0}, Param::J);
  CHECK_FALSE(quiet.divergent);
  CHECK(quiet.value == 0.0);

  TwoSpinXState s;
  s.a_plus = 1.0;
  TwoSpinXState ds;
  ds.a_plus = -1e-3;
  ds.a_minus = 1e-3;
  const MagnetizationFi loud = magnetization_fi(s, ds);
  CHECK(loud.divergent);
  CHECK(std::isinf(loud.value));
}

TEST_CASE("Bloch blocks") {
  TwoSpinXState up;
  up.a_plus = 1.0;
  const BlochBlocks b = bloch_blocks(up);
  CHECK(b.omega == std::array<double, 4>{1.0, 0.0, 0.0, 1.0});
  CHECK(b.omega_tilde == std::array<double, 4>{0.0, 0.0, 0.0, 0.0});

  for (const ChainParams& p : {ChainParams{0.7, 0.5, 0.1}, ChainParams{-1.6, 0.2, 0.3}}) {
    const BlochBlocks bb = bloch_blocks(correlators(p));
    CHECK(bb.omega[0] + bb.omega_tilde[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(minkowski(bb.omega, bb.omega) >= 0.0);
    CHECK(minkowski(bb.omega_tilde, bb.omega_tilde) >= 0.0);
  }

  // Block reconstruction: rho_1 = (w0 + w1 sx + w3 sz)/2 on {|00>,|11>},
  // rho_2 = (w~0 + w~1 sx)/2 on {|01>,|10>}.
  const Correlators corr = correlators({0.5, 1.0, 0.0});
  const BlochBlocks bb = bloch_blocks(corr);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = 0.5 * (bb.omega[0] + bb.omega[3]);
  m(3, 3) = 0.5 * (bb.omega[0] - bb.omega[3]);
  m(0, 3) = m(3, 0) = 0.5 * bb.omega[1];
  m(1, 1) = m(2, 2) = 0.5 * bb.omega_tilde[0];
  m(1, 2) = m(2, 1) = 0.5 * bb.omega_tilde[1];
  const Eigen::Matrix4d ref = oracle::xstate_matrix({corr.mz, corr.gxx, corr.gyy, corr.gzz});
  CHECK((m - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block QFI against the eigendecomposition oracle") {
  CHECK(qfi_xstate({0.5, 0.0, 0.0}, Param::J).total == doctest::Approx(0.0));

  const double block = qfi_xstate({0.5, 0.7, 0.0}, Param::J).total;
  CHECK(block == doctest::Approx(qfi_by_eigen({0.5, 0.7, 0.0}, Param::J)).epsilon(1e-6));

  CHECK(qfi_xstate({0.5, 0.7, 0.0}, Param::J).total ==
        doctest::Approx(qfi_xstate({-0.5, 0.7, 0.0}, Param::J).total).epsilon(1e-8));

  for (double J : {-2.0, -1.3, -0.999, -0.6, 0.0, 0.2, 0.999, 1.001, 1.8}) {
    for (double g : {0.2, 0.5, 0.7, 1.0}) {
      for (double D : {0.0, 0.02, 0.1, 0.2, 0.3}) {
        const ChainParams p{J, g, D};
        for (Param w : kAllParams) {
          const double a = qfi_xstate(p, w).total;
          const double e = qfi_by_eigen(p, w);
          INFO("J=" << J << " gamma=" << g << " D=" << D << " wrt=" << to_string(w));
          CHECK(std::abs(a - e) <= 1e-6 * std::max(a, e) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("near-polarized states keep full precision") {
  // Small J: F and H both approach 3 gamma^2 / 4 with corrections of order J^2.
  const double g = 0.5;
  const FisherPoint fp = fisher_point({1e-4, g, 0.0}, Param::J);
  CHECK(fp.F == doctest::Approx(0.75 * g * g).epsilon(1e-7));
  CHECK(fp.H == doctest::Approx(0.75 * g * g).epsilon(1e-7));
  CHECK(fp.F <= fp.H + 1e-9);
}

TEST_CASE("symmetric logarithmic derivative") {
  Matrix4c rho = Matrix4c::Zero();
  rho.diagonal() << 0.4, 0.3, 0.2, 0.1;
  CHECK(sld(rho, Matrix4c::Zero()).cwiseAbs().maxCoeff() == 0.0);

  Matrix4c drho = Matrix4c::Zero();
  drho.diagonal() << 0.1, -0.05, 0.02, -0.07;
  const Matrix4c L = sld(rho, drho);
  for (int i = 0; i < 4; ++i) CHECK(L(i, i).real() == doctest::Approx(drho(i, i).real() / rho(i, i).real()));
  CHECK((L - Matrix4c(L.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);

  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Matrix4c r = density_matrix(random_xstate(rng));
    const Matrix4c d = density_matrix(random_direction(rng));
    const Matrix4c S = sld(r, d);
    const Matrix4c residual = d - 0.5 * (S * r + r * S);
    // Project onto the support of rho.
    const Eigen::SelfAdjointEigenSolver<Matrix4c> eig(r);
    Matrix4c P = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) {
      if (eig.eigenvalues()(i) > 1e-12) P += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).adjoint();
    }
    CHECK((P * residual * P).norm() <= 1e-10);
  }
}

TEST_CASE("eigendecomposition QFI trivial cases") {
  Matrix4c rho = Matrix4c::Zero();
  rho.diagonal() << 0.25, 0.25, 0.25, 0.25;
  CHECK(qfi_eigen(rho, Matrix4c::Zero()) == 0.0);
  TwoSpinXState up;
  up.a_plus = 1.0;
  CHECK(qfi_eigen(density_matrix(up), Matrix4c::Zero()) == 0.0);
}

TEST_CASE("saturation") {
  const Saturation s0 = saturation({0.0, 0.5, 0.0}, Param::J);
  CHECK(s0.from_limit);
  CHECK_FALSE(s0.undefined);
  CHECK(s0.value == doctest::Approx(1.0).epsilon(1e-6));

  const Saturation reg = saturation({0.5, 0.7, 0.1}, Param::J);
  CHECK_FALSE(reg.from_limit);
  const FisherPoint fp = fisher_point({0.5, 0.7, 0.1}, Param::J);
  CHECK(reg.value == doctest::Approx(fp.F / fp.H));
  CHECK(fp.H == doctest::Approx(fp.H1 + fp.H2));

  // gamma = 0 inside the gapped region: the state does not move with J and
  // both informations vanish identically; the ratio has no limit there.
  const Saturation flat = saturation({0.3, 0.0, 0.0}, Param::J);
  CHECK(flat.undefined);
}

TEST_CASE("Cramer-Rao chain and symmetries on a grid") {
  for (double J = -2.0; J <= 2.0001; J += 0.25) {
    for (double g : {0.2, 0.7, 1.0}) {
      for (double D : {0.0, 0.1, 0.3}) {
        const double Jn = std::abs(std::abs(J) - 1.0) < 1e-9 ? std::copysign(0.999, J) : J;
        const ChainParams p{Jn, g, D};
        for (Param w : kAllParams) {
          const FisherPoint fp = fisher_point(p, w);
          INFO("J=" << Jn << " gamma=" << g << " D=" << D << " wrt=" << to_string(w));
          CHECK(fp.F <= fp.H + 1e-9);
          const FisherPoint mirror = fisher_point({-Jn, g, -D}, w);
          CHECK(mirror.F == doctest::Approx(fp.F).epsilon(1e-8));
          CHECK(mirror.H == doctest::Approx(fp.H).epsilon(1e-8));
        }
        const double h = qfi_xstate(p, Param::J).total;
        CHECK(qfi_xstate({Jn, -g, D}, Param::J).total == doctest::Approx(h).epsilon(1e-8));
      }
    }
  }
}
