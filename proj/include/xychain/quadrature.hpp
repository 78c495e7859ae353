#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "xychain/error.hpp"
#include "xychain/types.hpp"

namespace xychain::quad {

// Gauss-Kronrod 10/21 abscissae and weights on [-1, 1] (QUADPACK qk21).
// Odd indices of kKronrodNodes are the Gauss-Legendre nodes.
inline constexpr std::array<double, 11> kKronrodNodes{
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights{
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077715255265218, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kGaussWeights{
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t N>
struct Result {
  std::array<double, N> value{};
  std::array<double, N> error{};
  std::size_t intervals = 0;
  std::size_t evaluations = 0;
};

namespace detail {

template <std::size_t N>
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  std::array<double, N> value{};
  std::array<double, N> error{};
  double badness = 0.0;  // max_k error_k / tolerance_k, filled by the driver
};

template <std::size_t N, class F>
Segment<N> gk21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::array<double, N> kronrod{};
  std::array<double, N> gauss{};

  const std::array<double, N> fc = f(center);
  for (std::size_t k = 0; k < N; ++k) kronrod[k] = fc[k] * kKronrodWeights[10];

  for (std::size_t i = 0; i < 10; ++i) {
    const double dx = half * kKronrodNodes[i];
    const std::array<double, N> f1 = f(center - dx);
    const std::array<double, N> f2 = f(center + dx);
    for (std::size_t k = 0; k < N; ++k) {
      const double s = f1[k] + f2[k];
      kronrod[k] += kKronrodWeights[i] * s;
      if (i % 2 == 1) gauss[k] += kGaussWeights[i / 2] * s;
    }
  }

  Segment<N> seg{lo, hi, {}, {}, 0.0};
  for (std::size_t k = 0; k < N; ++k) {
    seg.value[k] = kronrod[k] * half;
    seg.error[k] = std::abs((kronrod[k] - gauss[k]) * half);
  }
  return seg;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over [lo, hi]. Every component must meet
/// error_k <= max(abs_tol, rel_tol * |value_k|). The interval with the worst
/// tolerance-normalised error is bisected until that holds.
///
/// F must be callable as std::array<double, N>(double).
template <std::size_t N, class F>
Result<N> integrate(F&& f, double lo, double hi, const QuadratureConfig& cfg) {
  using Seg = detail::Segment<N>;
  auto worse = [](const Seg& a, const Seg& b) { return a.badness < b.badness; };

  std::vector<Seg> heap;
  heap.reserve(64);

  std::array<double, N> total{};
  std::array<double, N> total_err{};

  auto add = [&](const Seg& s, double sign) {
    for (std::size_t k = 0; k < N; ++k) {
      total[k] += sign * s.value[k];
      total_err[k] += sign * s.error[k];
    }
  };
  auto tolerance = [&](std::size_t k) {
    return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total[k]));
  };
  auto score = [&](Seg& s) {
    double b = 0.0;
    for (std::size_t k = 0; k < N; ++k) b = std::max(b, s.error[k] / tolerance(k));
    s.badness = b;
  };
  auto converged = [&]() {
    for (std::size_t k = 0; k < N; ++k) {
      // Accumulated sums can drift slightly negative after many updates.
      if (std::max(total_err[k], 0.0) > tolerance(k)) return false;
    }
    return true;
  };

  Seg first = detail::gk21<N>(f, lo, hi);
  add(first, 1.0);
  score(first);
  heap.push_back(first);
  std::size_t evaluations = 21;

  while (!converged()) {
    if (heap.size() >= cfg.max_subdivisions) {
      throw Error(ErrorKind::QuadratureFailure,
                  "adaptive quadrature exceeded " + std::to_string(cfg.max_subdivisions) +
                      " subdivisions on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Seg worst = heap.back();
    heap.pop_back();

    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw Error(ErrorKind::QuadratureFailure,
                  "adaptive quadrature reached machine resolution near x = " + std::to_string(mid));
    }
    Seg left = detail::gk21<N>(f, worst.lo, mid);
    Seg right = detail::gk21<N>(f, mid, worst.hi);
    evaluations += 42;
    add(worst, -1.0);
    add(left, 1.0);
    add(right, 1.0);

    // Tolerances depend on the running totals, so re-rank everything.
    heap.push_back(left);
    heap.push_back(right);
    for (auto& s : heap) score(s);
    std::make_heap(heap.begin(), heap.end(), worse);
  }

  // Recompute totals from the surviving segments to shed accumulated
  // cancellation error from the add/subtract bookkeeping.
  Result<N> out;
  for (const auto& s : heap) {
    for (std::size_t k = 0; k < N; ++k) {
      out.value[k] += s.value[k];
      out.error[k] += s.error[k];
    }
  }
  out.intervals = heap.size();
  out.evaluations = evaluations;
  return out;
}

/// Scalar convenience wrapper.
template <class F>
Result<1> integrate_scalar(F&& f, double lo, double hi, const QuadratureConfig& cfg) {
  return integrate<1>([&](double x) { return std::array<double, 1>{f(x)}; }, lo, hi, cfg);
}

}  // namespace xychain::quad
