#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "holderlab/errors.hpp"
#include "holderlab/exponents.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/parallel.hpp"

// Variable-exponent Lebesgue machinery.  The norm of u is the Luxemburg
// gauge: the unique lambda > 0 with modular(u/lambda) = 1, found by bisection
// on a strictly decreasing function of lambda.  The anisotropic Sobolev norm
// stacks the gauge of u (against the pointwise-largest exponent) with the
// gauges of its partial derivatives (against the matching direction
// exponents).

namespace holderlab {

// rho(u) = sum_k w |u_k|^{p_k}.  The midpoint weight is uniform, so it
// factors out of the fixed-tree sum.
inline double modular(const GridFunction& u, const GridFunction& p) {
  if (u.grid() != p.grid())
    throw GridError("modular: function and exponent live on different grids");
  const double w = u.grid()->cell_volume();
  return w * pairwise_sum(u.size(), [&](std::size_t k) {
           return std::pow(std::fabs(u[k]), p[k]);
         });
}

struct NormResult {
  double value = 0.0;
  int iterations = 0;        // bisection steps (summed for composite norms)
  double bracket_width = 0.0;  // final bracket (largest, for composite norms)
  std::size_t cells = 0;
};

namespace detail {
inline constexpr double kGaugeRelTol = 1e-10;
inline constexpr int kGaugeMaxBisect = 200;
inline constexpr int kGaugeMaxBracket = 120;
}  // namespace detail

// Luxemburg gauge of u with respect to exponent field p.  Zero for the zero
// function; otherwise brackets the root of modular(u/lambda) - 1 by doubling
// or halving from lambda0 = max|u| * measure and bisects to a relative width
// of 1e-10.
inline NormResult luxemburg_norm(const GridFunction& u, const GridFunction& p) {
  if (u.grid() != p.grid())
    throw GridError("luxemburg_norm: function and exponent live on different grids");
  NormResult res;
  res.cells = u.size();

  double umax = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    umax = std::max(umax, std::fabs(u[k]));
  if (umax == 0.0) return res;  // zero function: gauge 0

  const double w = u.grid()->cell_volume();
  const auto rho_scaled = [&](double lambda) {
    return w * pairwise_sum(u.size(), [&](std::size_t k) {
             return std::pow(std::fabs(u[k]) / lambda, p[k]);
           });
  };

  double lambda0 = umax * u.grid()->measure();
  double lo, hi;
  double r0 = rho_scaled(lambda0);
  if (r0 == 1.0) {
    res.value = lambda0;
    return res;
  }
  if (r0 > 1.0) {
    // gauge above lambda0: double until the modular drops to 1 or below
    lo = lambda0;
    hi = lambda0;
    int steps = 0;
    do {
      if (++steps > detail::kGaugeMaxBracket)
        throw BracketError("luxemburg_norm: no upper bracket after " +
                           std::to_string(detail::kGaugeMaxBracket) +
                           " doublings from " + std::to_string(lambda0));
      lo = hi;
      hi *= 2.0;
    } while (rho_scaled(hi) > 1.0);
  } else {
    // gauge below lambda0: halve until the modular rises to 1 or above
    hi = lambda0;
    lo = lambda0;
    int steps = 0;
    do {
      if (++steps > detail::kGaugeMaxBracket)
        throw BracketError("luxemburg_norm: no lower bracket after " +
                           std::to_string(detail::kGaugeMaxBracket) +
                           " halvings from " + std::to_string(lambda0));
      hi = lo;
      lo *= 0.5;
    } while (rho_scaled(lo) < 1.0);
  }

  // rho(u/lambda) is strictly decreasing in lambda: > 1 left of the root
  int it = 0;
  while (hi - lo > detail::kGaugeRelTol * (0.5 * (lo + hi)) &&
         it < detail::kGaugeMaxBisect) {
    const double mid = 0.5 * (lo + hi);
    if (rho_scaled(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
    ++it;
  }
  res.value = 0.5 * (lo + hi);
  res.iterations = it;
  res.bracket_width = hi - lo;
  return res;
}

inline double sup_norm(const GridFunction& u) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    m = std::max(m, std::fabs(u[k]));
  return m;
}

// ||u|| = gauge(u, pointwise max exponent) + sum_i gauge(d_i u, p_i),
// accumulated left to right in axis order.
inline NormResult sobolev_norm(const GridFunction& u,
                               const ExponentVectorField& p) {
  if (u.grid() != p.grid())
    throw GridError("sobolev_norm: function and exponents live on different grids");
  NormResult total;
  total.cells = u.size();
  const GridFunction pmax = p.pointwise_max_field();
  NormResult part = luxemburg_norm(u, pmax);
  total.value = part.value;
  total.iterations = part.iterations;
  total.bracket_width = part.bracket_width;
  for (int axis = 0; axis < p.directions(); ++axis) {
    const GridFunction du = partial_derivative(u, axis);
    part = luxemburg_norm(du, p.field(axis));
    total.value += part.value;
    total.iterations += part.iterations;
    total.bracket_width = std::max(total.bracket_width, part.bracket_width);
  }
  return total;
}

}  // namespace holderlab
