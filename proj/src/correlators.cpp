#include "xychain/correlators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "xychain/error.hpp"
#include "xychain/quadrature.hpp"

namespace xychain {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStateTol = 1e-9;

// u = J(cos phi - 2D sin phi) - 1 and v = J gamma sin phi, so Delta = |(u, v)|.
struct Dispersion {
  double u, v, delta, c, s;
};

Dispersion dispersion(const ChainParams& p, double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double u = p.J * (c - 2.0 * p.D * s) - 1.0;
  const double v = p.J * p.gamma * s;
  return {u, v, std::hypot(u, v), c, s};
}

// q = 1 + u / Delta >= 0. For u <= 0 it is written as v^2 / (Delta (Delta - u))
// so that it keeps full relative precision when the chain is nearly polarized
// and q is tiny. An exact zero of Delta (only on the gapless line at
// gamma = 0) is a measure-zero sign jump and is given u / Delta = 0.
double defect(const Dispersion& d) {
  if (d.delta == 0.0) return 1.0;
  if (d.u <= 0.0) return d.v * d.v / (d.delta * (d.delta - d.u));
  return 1.0 + d.u / d.delta;
}

// Partial derivatives of u and v along one parameter.
struct DuDv {
  double du, dv;
};

DuDv partials(const ChainParams& p, Param wrt, double c, double s) {
  switch (wrt) {
    case Param::J:
      return {c - 2.0 * p.D * s, p.gamma * s};
    case Param::gamma:
      return {0.0, p.J * s};
    case Param::D:
      return {-2.0 * p.J * s, 0.0};
  }
  return {0.0, 0.0};
}

// d(gamma J)/d(param), the prefactor of the anisotropic integral.
double d_gamma_j(const ChainParams& p, Param wrt) {
  switch (wrt) {
    case Param::J:
      return p.gamma;
    case Param::gamma:
      return p.J;
    case Param::D:
      return 0.0;
  }
  return 0.0;
}

void require_off_critical(const ChainParams& p) {
  if (is_critical(p)) {
    throw Error(ErrorKind::CriticalPoint,
                "derivatives diverge at critical point J=" + std::to_string(p.J) +
                    " gamma=" + std::to_string(p.gamma) + " D=" + std::to_string(p.D));
  }
}

// The three base integrals over [0, pi]:
//   m = int q,  a = int cos(phi) q,  b = int sin^2(phi)/Delta,
// with q = 1 + u/Delta. Since int cos = 0, a equals int cos(phi) u/Delta.
// b is only needed (and only finite everywhere) when gamma J != 0.
struct BaseIntegrals {
  double m, a, b;
};

Correlators assemble(const ChainParams& p, const BaseIntegrals& I) {
  const double A = -I.a / kPi;
  const double B = p.gamma * p.J * I.b / kPi;
  Correlators out;
  out.mz_defect = I.m / kPi;
  out.mz = 1.0 - out.mz_defect;
  const double mz = out.mz;
  out.gyy = A + B;  // G_{+1}
  out.gxx = A - B;  // G_{-1}
  out.gzz = mz * mz - out.gyy * out.gxx;
  return out;
}

}  // namespace

double delta(const ChainParams& p, double phi) { return dispersion(p, phi).delta; }

bool is_critical(const ChainParams& p) {
  if (std::abs(p.J) == 1.0) return true;
  if (p.gamma != 0.0 || p.J == 0.0) return false;
  // gamma = 0: Delta = |u| vanishes where J cos phi - 2 J D sin phi = 1 for some
  // phi in [0, pi]. The maximum of a cos + b sin over [0, pi] is sqrt(a^2+b^2)
  // when b >= 0 (stationary point inside), else |a| at an endpoint.
  const double a = p.J;
  const double b = -2.0 * p.J * p.D;
  const double peak = b >= 0.0 ? std::hypot(a, b) : std::abs(a);
  return peak >= 1.0;
}

double magnetization(const ChainParams& p, const QuadratureConfig& quad) {
  validate(p);
  validate(quad);
  const auto r = quad::integrate_scalar(
      [&](double phi) { return defect(dispersion(p, phi)); }, 0.0, kPi, quad);
  return 1.0 - r.value[0] / kPi;
}

double g_correlator(const ChainParams& p, int sign, const QuadratureConfig& quad) {
  if (sign != 1 && sign != -1) {
    throw Error(ErrorKind::InvalidArgument, "g_correlator sign must be +1 or -1");
  }
  validate(p);
  validate(quad);
  const bool anisotropic = p.gamma * p.J != 0.0;
  const auto r = quad::integrate<2>(
      [&](double phi) {
        const auto d = dispersion(p, phi);
        const double b = anisotropic ? d.s * d.s / d.delta : 0.0;
        return std::array<double, 2>{d.c * defect(d), b};
      },
      0.0, kPi, quad);
  const double A = -r.value[0] / kPi;
  const double B = p.gamma * p.J * r.value[1] / kPi;
  return A + sign * B;
}

Correlators correlators(const ChainParams& p, const QuadratureConfig& quad) {
  validate(p);
  validate(quad);
  const bool anisotropic = p.gamma * p.J != 0.0;
  const auto r = quad::integrate<3>(
      [&](double phi) {
        const auto d = dispersion(p, phi);
        const double w = defect(d);
        const double b = anisotropic ? d.s * d.s / d.delta : 0.0;
        return std::array<double, 3>{w, d.c * w, b};
      },
      0.0, kPi, quad);
  return assemble(p, {r.value[0], r.value[1], r.value[2]});
}

CorrelatorJet correlator_jet(const ChainParams& p, const QuadratureConfig& quad) {
  validate(p);
  validate(quad);
  require_off_critical(p);

  // Off the critical set Delta > 0 on [0, pi], so every integral is finite;
  // int sin^2/Delta is needed even at gamma = 0 for the gamma-derivative.
  // Layout: [m, a, b] followed by [dm, da, db] for J, gamma, D.
  // d(u/Delta) = v (v du - u dv) / Delta^3,  d(1/Delta) = -(u du + v dv) / Delta^3.
  const auto r = quad::integrate<12>(
      [&](double phi) {
        const auto d = dispersion(p, phi);
        const double inv = 1.0 / d.delta;
        const double inv3 = inv * inv * inv;
        const double s2 = d.s * d.s;
        std::array<double, 12> out{};
        out[0] = defect(d);
        out[1] = d.c * out[0];
        out[2] = s2 * inv;
        for (std::size_t k = 0; k < 3; ++k) {
          const auto [du, dv] = partials(p, kAllParams[k], d.c, d.s);
          const double dw = d.v * (d.v * du - d.u * dv) * inv3;
          out[3 + 3 * k] = dw;
          out[4 + 3 * k] = d.c * dw;
          out[5 + 3 * k] = -s2 * (d.u * du + d.v * dv) * inv3;
        }
        return out;
      },
      0.0, kPi, quad);

  const auto& v = r.value;
  CorrelatorJet jet;
  jet.value = assemble(p, {v[0], v[1], v[2]});
  const double mz = jet.value.mz;
  const double g_plus = jet.value.gyy;
  const double g_minus = jet.value.gxx;
  for (std::size_t k = 0; k < 3; ++k) {
    const Param wrt = kAllParams[k];
    const double dmz = -v[3 + 3 * k] / kPi;
    const double dA = -v[4 + 3 * k] / kPi;
    const double dB = (d_gamma_j(p, wrt) * v[2] + p.gamma * p.J * v[5 + 3 * k]) / kPi;
    CorrelatorDerivative& g = jet.gradient[k];
    g.mz = dmz;
    g.mz_defect = -dmz;
    g.gyy = dA + dB;
    g.gxx = dA - dB;
    g.gzz = 2.0 * mz * dmz - (g.gyy * g_minus + g_plus * g.gxx);
  }
  return jet;
}

CorrelatorDerivative d_correlators(const ChainParams& p, Param wrt, const QuadratureConfig& quad) {
  return correlator_jet(p, quad).d(wrt);
}

TwoSpinXState x_state(const Correlators& corr) {
  // With e = 1 - mz and gzz = mz^2 - gxx gyy:
  //   a+ = ((2 - e)^2 - gxx gyy) / 4,  a- = (e^2 - gxx gyy) / 4,  c = (e (2 - e) + gxx gyy) / 4.
  const double e = corr.mz_defect;
  const double gg = corr.gxx * corr.gyy;
  TwoSpinXState s;
  s.a_plus = 0.25 * ((2.0 - e) * (2.0 - e) - gg);
  s.a_minus = 0.25 * (e * e - gg);
  s.b_plus = 0.25 * (corr.gxx + corr.gyy);
  s.b_minus = 0.25 * (corr.gxx - corr.gyy);
  s.c = 0.25 * (e * (2.0 - e) + gg);

  const bool ok = std::abs(s.trace() - 1.0) <= kStateTol && s.a_plus >= -kStateTol &&
                  s.a_minus >= -kStateTol && s.c >= -kStateTol &&
                  s.b_minus * s.b_minus <= s.a_plus * s.a_minus + kStateTol &&
                  std::abs(s.b_plus) <= s.c + kStateTol;
  if (!ok) {
    throw Error(ErrorKind::PositivityViolation,
                "two-spin state is not a valid density matrix (a+=" + std::to_string(s.a_plus) +
                    " a-=" + std::to_string(s.a_minus) + " c=" + std::to_string(s.c) +
                    " b+=" + std::to_string(s.b_plus) + " b-=" + std::to_string(s.b_minus) + ")");
  }
  return s;
}

TwoSpinXState x_state(const ChainParams& p, const QuadratureConfig& quad) {
  return x_state(correlators(p, quad));
}

TwoSpinXState x_state_derivative(const CorrelatorDerivative& d) {
  TwoSpinXState s;
  s.a_plus = 0.25 * (2.0 * d.mz + d.gzz);
  s.a_minus = 0.25 * (-2.0 * d.mz + d.gzz);
  s.b_plus = 0.25 * (d.gxx + d.gyy);
  s.b_minus = 0.25 * (d.gxx - d.gyy);
  s.c = -0.25 * d.gzz;
  return s;
}

}  // namespace xychain
