#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "xychain/correlators.hpp"
#include "xychain/error.hpp"

using namespace xychain;

namespace {

const QuadratureConfig kTight{1e-13, 1e-13, 8192};

double component(const Correlators& c, int k) {
  switch (k) {
    case 0: return c.mz;
    case 1: return c.gxx;
    case 2: return c.gyy;
    default: return c.gzz;
  }
}

void check_against_fd(const ChainParams& p, Param wrt, double h = 1e-3) {
  const CorrelatorDerivative d = d_correlators(p, wrt);
  for (int k = 0; k < 4; ++k) {
    const double fd = oracle::richardson(
        [&](double x) { return component(correlators(with(p, wrt, x), kTight), k); }, get(p, wrt), h);
    INFO("J=" << p.J << " gamma=" << p.gamma << " D=" << p.D << " wrt=" << to_string(wrt) << " component " << k);
    CHECK(std::abs(component(d, k) - fd) <= 1e-6 * std::abs(fd) + 1e-9);
  }
}

}  // namespace

TEST_CASE("gap function") {
  CHECK(delta({0.0, 0.5, 0.3}, std::numbers::pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(delta({1.0, 0.0, 0.0}, 0.0) == 0.0);
  CHECK(delta({1.0, 0.5, 0.0}, std::numbers::pi / 2) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
}

TEST_CASE("criticality") {
  CHECK(is_critical({1.0, 0.5, 0.0}));
  CHECK(is_critical({-1.0, 0.5, 0.2}));
  CHECK_FALSE(is_critical({0.999, 0.5, 0.0}));
  CHECK_FALSE(is_critical({0.5, 0.0, 0.0}));  // gapped: J cos(phi) < 1 everywhere
  CHECK(is_critical({0.9, 0.0, -0.3}));       // J sqrt(1 + 4 D^2) > 1, peak inside (0, pi)
  CHECK_FALSE(is_critical({0.9, 0.0, 0.3}));  // sine term only lowers u on [0, pi]
  CHECK(is_critical({1.5, 0.0, 0.0}));
  CHECK_FALSE(is_critical({0.0, 0.0, 0.0}));
}

TEST_CASE("magnetization") {
  CHECK(magnetization({0.0, 0.3, 0.7}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(magnetization({0.5, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  const oracle::Corr ref = oracle::correlators(0.5, 1.0, 0.0);
  CHECK(std::abs(magnetization({0.5, 1.0, 0.0}) - ref.mz) < 1e-8);
}

TEST_CASE("nearest-neighbour correlators G(+1), G(-1)") {
  CHECK(std::abs(g_correlator({0.0, 0.7, 0.1}, +1)) < 1e-14);
  CHECK(std::abs(g_correlator({0.0, 0.7, 0.1}, -1)) < 1e-14);
  CHECK(g_correlator({0.5, 0.0, 0.0}, +1) == doctest::Approx(g_correlator({0.5, 0.0, 0.0}, -1)));
  const oracle::Corr ref = oracle::correlators(0.5, 1.0, 0.0);
  CHECK(std::abs(g_correlator({0.5, 1.0, 0.0}, +1) - ref.gyy) < 1e-8);
  CHECK(std::abs(g_correlator({0.5, 1.0, 0.0}, -1) - ref.gxx) < 1e-8);
  CHECK_THROWS_AS(g_correlator({0.5, 1.0, 0.0}, 0), Error);
}

TEST_CASE("correlator bundle") {
  const Correlators zero = correlators({0.0, 0.4, 0.2});
  CHECK(zero.mz == doctest::Approx(1.0));
  CHECK(std::abs(zero.gxx) < 1e-14);
  CHECK(std::abs(zero.gyy) < 1e-14);
  CHECK(zero.gzz == doctest::Approx(1.0));

  const Correlators flat = correlators({0.5, 0.0, 0.0});
  CHECK(flat.mz == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(flat.gxx) < 1e-12);
  CHECK(std::abs(flat.gyy) < 1e-12);
  CHECK(flat.gzz == doctest::Approx(1.0).epsilon(1e-12));

  for (const ChainParams& p : {ChainParams{0.999, 1.0, 0.0}, ChainParams{1.7, 0.3, 0.2}, ChainParams{-0.8, 0.6, 0.25}}) {
    const Correlators c = correlators(p);
    const oracle::Corr ref = oracle::correlators(p.J, p.gamma, p.D);
    INFO("J=" << p.J << " gamma=" << p.gamma << " D=" << p.D);
    CHECK(std::abs(c.mz - ref.mz) < 1e-8);
    CHECK(std::abs(c.gxx - ref.gxx) < 1e-8);
    CHECK(std::abs(c.gyy - ref.gyy) < 1e-8);
    CHECK(std::abs(c.gzz - ref.gzz) < 1e-8);
    CHECK(c.gzz == doctest::Approx(c.mz * c.mz - c.gxx * c.gyy).epsilon(1e-14));
    for (double x : {c.mz, c.gxx, c.gyy, c.gzz}) CHECK(std::abs(x) <= 1.0);
  }
}

TEST_CASE("symmetries") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> J(-2.0, 2.0), g(-1.0, 1.0), D(-0.5, 0.5);
  for (int i = 0; i < 20; ++i) {
    const ChainParams p{J(rng), g(rng), D(rng)};
    if (is_critical(p)) continue;
    const Correlators a = correlators(p);
    const Correlators mirror = correlators({-p.J, p.gamma, -p.D});
    INFO("J=" << p.J << " gamma=" << p.gamma << " D=" << p.D);
    // phi -> pi - phi: mz and gzz are invariant, the in-plane correlators change sign.
    CHECK(std::abs(a.mz - mirror.mz) < 1e-9);
    CHECK(std::abs(a.gzz - mirror.gzz) < 1e-9);
    CHECK(std::abs(a.gxx + mirror.gxx) < 1e-9);
    CHECK(std::abs(a.gyy + mirror.gyy) < 1e-9);

    const Correlators flipped = correlators({p.J, -p.gamma, p.D});
    CHECK(std::abs(a.mz - flipped.mz) < 1e-12);
    CHECK(std::abs(a.gzz - flipped.gzz) < 1e-12);
    CHECK(std::abs(a.gxx - flipped.gyy) < 1e-12);
    CHECK(std::abs(a.gyy - flipped.gxx) < 1e-12);
  }
}

TEST_CASE("two-spin X-state") {
  const TwoSpinXState up = x_state(ChainParams{0.0, 0.5, 0.1});
  CHECK(up.a_plus == doctest::Approx(1.0));
  CHECK(std::abs(up.a_minus) < 1e-14);
  CHECK(std::abs(up.b_plus) < 1e-14);
  CHECK(std::abs(up.b_minus) < 1e-14);
  CHECK(std::abs(up.c) < 1e-14);

  const TwoSpinXState s = x_state(ChainParams{0.7, 0.5, 0.1});
  CHECK(std::abs(s.trace() - 1.0) < 1e-12);
  CHECK(s.b_minus * s.b_minus <= s.a_plus * s.a_minus);
  CHECK(std::abs(s.b_plus) <= s.c);

  const TwoSpinXState t = x_state(ChainParams{0.5, 1.0, 0.0});
  const Eigen::Matrix4d ref = oracle::xstate_matrix(oracle::correlators(0.5, 1.0, 0.0));
  CHECK(std::abs(t.a_plus - ref(0, 0)) < 1e-8);
  CHECK(std::abs(t.a_minus - ref(3, 3)) < 1e-8);
  CHECK(std::abs(t.c - ref(1, 1)) < 1e-8);
  CHECK(std::abs(t.b_plus - ref(1, 2)) < 1e-8);
  CHECK(std::abs(t.b_minus - ref(0, 3)) < 1e-8);
}

TEST_CASE("positivity gate rejects inconsistent correlators") {
  Correlators bad;
  bad.mz = 0.9;
  bad.mz_defect = 0.1;
  bad.gxx = 0.8;
  bad.gyy = 0.8;
  bad.gzz = bad.mz * bad.mz - bad.gxx * bad.gyy;
  try {
    x_state(bad);
    FAIL("expected PositivityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PositivityViolation);
  }
}

TEST_CASE("analytic derivatives") {
  const CorrelatorDerivative flat = d_correlators({0.5, 0.0, 0.0}, Param::J);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(component(flat, k)) < 1e-12);

  for (Param w : kAllParams) check_against_fd({0.5, 0.7, 0.1}, w);
  for (Param w : kAllParams) check_against_fd({-1.4, 0.3, -0.2}, w);
  // Steps must stay well inside the distance to the critical line.
  for (Param w : kAllParams) check_against_fd({0.999, 1.0 - 2e-3, 0.0}, w, 1e-5);

  // Mirror: mz is even under (J, D) -> (-J, -D), so its J-derivative is odd.
  const ChainParams p{0.6, 0.4, 0.15};
  CHECK(d_correlators(p, Param::J).mz ==
        doctest::Approx(-d_correlators({-p.J, p.gamma, -p.D}, Param::J).mz).epsilon(1e-9));

  // One jet carries all three gradients.
  const CorrelatorJet jet = correlator_jet(p);
  for (Param w : kAllParams) {
    const CorrelatorDerivative d = d_correlators(p, w);
    for (int k = 0; k < 4; ++k) CHECK(component(jet.d(w), k) == doctest::Approx(component(d, k)).epsilon(1e-14));
  }
}

TEST_CASE("derivatives refuse the critical set") {
  try {
    d_correlators({1.0, 0.5, 0.0}, Param::J);
    FAIL("expected CriticalPoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CriticalPoint);
  }
  CHECK_NOTHROW(correlators({1.0, 0.5, 0.0}));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(correlators({0.5, 1.5, 0.0}), Error);
  CHECK_THROWS_AS(correlators({std::nan(""), 0.5, 0.0}), Error);
  CHECK(parse_param("gamma") == Param::gamma);
  CHECK(parse_param("D") == Param::D);
  CHECK_FALSE(parse_param("x").has_value());
}
