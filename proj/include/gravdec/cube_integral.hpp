#pragma once

// The dimensionless surface-layer integral of a cube displaced by a small
// fraction of its side:
//
//   I = ∫∫∫∫_{[0,1]^4} ( 1/ρ - 1/sqrt(ρ^2 + 1) ),  ρ^2 = (x-x')^2 + (y-y')^2
//     = 4 ∫∫_{[0,1]^2} (1-ex)(1-ey) ( 1/|e| - 1/sqrt(|e|^2 + 1) )
//     = 2π/3.
//
// The first term pairs points on the same face, the second points on the
// opposite faces a unit distance apart.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gravdec/error.hpp"

namespace gravdec {

enum class IntegralForm { quadruple, reduced_double };

struct QuadratureResult {
  double value = 0;
  double error_estimate = 0;
  std::size_t evaluations = 0;
};

/// Integrand of the reduced double form before the (1-ex)(1-ey) weight.
inline double surface_kernel(double ex, double ey) {
  const double r2 = ex * ex + ey * ey;
  return 1.0 / std::sqrt(r2) - 1.0 / std::sqrt(r2 + 1.0);
}

namespace detail {

// Reduced form on the triangle ey <= ex with ey = ex*u. The 1/|e| singularity
// cancels against the Jacobian, leaving a smooth integrand on [0,1]^2:
//   I = 8 ∫_0^1 dx ∫_0^1 du (1-x)(1-xu) [ 1/sqrt(1+u^2) - x/sqrt(1 + x^2(1+u^2)) ].
inline QuadratureResult integral_double(double tol) {
  using boost::math::quadrature::gauss_kronrod;
  QuadratureResult r;
  double inner_err_max = 0;
  auto outer = [&](double x) {
    auto inner = [&, x](double u) {
      ++r.evaluations;
      const double q = 1.0 + u * u;
      return (1 - x) * (1 - x * u) * (1.0 / std::sqrt(q) - x / std::sqrt(1.0 + x * x * q));
    };
    double e = 0;
    const double v = gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 15, tol, &e);
    inner_err_max = std::max(inner_err_max, e);
    return v;
  };
  double e = 0;
  const double v = gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, 15, tol, &e);
  r.value = 8 * v;
  r.error_estimate = 8 * (e + inner_err_max);
  return r;
}

// Direct four-dimensional evaluation, nested x, x', y, y'. Each primed range
// is split at the coincident point so the integrable line singularity sits on
// an endpoint, and every level is mapped to a smooth integrand:
//   y'      : y' - y = ±dx sinh(t) absorbs the 1/sqrt(dx^2 + s^2) peak,
//   y       : y = dx sinh(v) resolves the log(y/dx) shoulder near y ~ dx,
//   x'      : |x - x'| = len e^{-w} absorbs the log|x - x'| singularity.
// Gauss-Kronrod then converges quickly on all four levels.
inline QuadratureResult integral_quadruple(double tol) {
  using boost::math::quadrature::gauss_kronrod;
  using GK = gauss_kronrod<double, 15>;
  constexpr unsigned kDepth = 20;
  constexpr double kTail = 36.0;  // e^{-36} ~ 2e-16: truncation of the w-range
  QuadratureResult r;
  auto integrate = [&](auto&& f, double a, double b) { return GK::integrate(f, a, b, kDepth, tol); };

  // ∫_0^len ds [1/sqrt(dx^2+s^2) - 1/sqrt(dx^2+s^2+1)]
  auto along_yp = [&](double dx, double len) {
    if (len <= 0) return 0.0;
    auto f = [&, dx](double t) {
      ++r.evaluations;
      const double rho = dx * std::cosh(t);
      return 1.0 - rho / std::sqrt(rho * rho + 1.0);
    };
    return integrate(f, 0.0, std::asinh(len / dx));
  };

  // J(dx) = ∫_0^1 dy ∫_0^1 dy' k(dx, y - y'), symmetric about y = 1/2.
  auto over_y = [&](double dx) {
    auto f = [&, dx](double v) {
      const double y = dx * std::sinh(v);
      return (along_yp(dx, y) + along_yp(dx, 1.0 - y)) * dx * std::cosh(v);
    };
    return 2 * integrate(f, 0.0, std::asinh(0.5 / dx));
  };

  // ∫_0^len d(dx) J(dx)
  auto along_xp = [&](double len) {
    if (len <= 0) return 0.0;
    auto f = [&, len](double w) {
      const double dx = len * std::exp(-w);
      return over_y(dx) * dx;
    };
    return integrate(f, 0.0, kTail);
  };

  auto over_x = [&](double x) { return along_xp(x) + along_xp(1.0 - x); };
  r.value = integrate(over_x, 0.0, 1.0);
  // Kronrod estimates of the inner levels do not compose into a usable bound,
  // so `error_estimate` is filled in by the caller from a coarser rerun.
  // J(dx) <= 2 log(2/dx) + 4, so the truncated w-tail is below
  // 2 len e^{-kTail} (kTail + 5) per side.
  r.error_estimate = 4 * std::exp(-kTail) * (kTail + 5);
  return r;
}

}  // namespace detail

/// Evaluates I. Throws ConvergenceError (with the best estimate) if the
/// estimated error exceeds `max_error`.
inline QuadratureResult integral_I_detailed(IntegralForm form, double max_error = -1) {
  QuadratureResult r;
  if (form == IntegralForm::reduced_double) {
    r = detail::integral_double(1e-13);
    if (max_error < 0) max_error = 1e-9;
  } else {
    r = detail::integral_quadruple(1e-4);
    const QuadratureResult coarse = detail::integral_quadruple(1e-3);
    r.error_estimate += std::abs(r.value - coarse.value);
    r.evaluations += coarse.evaluations;
    if (max_error < 0) max_error = 1e-4;
  }
  if (!(r.error_estimate <= max_error) || !std::isfinite(r.value))
    throw ConvergenceError("surface integral did not converge", r.value, r.error_estimate);
  return r;
}

inline double integral_I(IntegralForm form) { return integral_I_detailed(form).value; }

/// Closed form of I.
inline constexpr double integral_I_exact = 2.0 * std::numbers::pi / 3.0;

}  // namespace gravdec
