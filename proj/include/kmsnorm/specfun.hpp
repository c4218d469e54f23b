#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kmsnorm/quadrature.hpp"

namespace kmsnorm {

namespace detail {

// Power series sum_{k>=1} x^k / k^2, used only for |x| <= 1/2.
inline double dilog_series(double x) {
  double power = x;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double term = power / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    power *= x;
  }
  return sum;
}

} // namespace detail

/// Real dilogarithm Li2(x) = -int_0^x log(1-u)/u du, defined for x <= 1.
///
/// The series is summed directly on [-1/2, 1/2]. Other arguments are mapped
/// into that disc by reflection (x in (1/2, 1)), the Landen transform
/// (x in [-1, -1/2)) and inversion (x < -1).
inline double dilog(double x) {
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  if (std::isnan(x) || x > 1.0) throw std::domain_error("dilog: argument must be <= 1");
  if (x == 1.0) return pi2_6;
  if (x == 0.0) return 0.0;
  if (std::abs(x) <= 0.5) return detail::dilog_series(x);
  if (x > 0.5) {
    // Li2(x) + Li2(1-x) = pi^2/6 - log(x) log(1-x)
    return pi2_6 - std::log(x) * std::log1p(-x) - detail::dilog_series(1.0 - x);
  }
  if (x >= -1.0) {
    // Li2(x) = -Li2(x/(x-1)) - log^2(1-x)/2, with x/(x-1) in (1/3, 1/2]
    const double l = std::log1p(-x);
    return -detail::dilog_series(x / (x - 1.0)) - 0.5 * l * l;
  }
  // x < -1: Li2(x) = -pi^2/6 - log^2(-x)/2 - Li2(1/x)
  const double l = std::log(-x);
  return -pi2_6 - 0.5 * l * l - dilog(1.0 / x);
}

/// Natural log of K_nu(x), the modified Bessel function of the second kind.
///
/// Evaluates K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt. The integrand
/// is rescaled by its peak value exp(g*), g(t) = nu t - x cosh t, so the
/// result stays representable when K_nu itself over- or underflows.
inline double log_bessel_k(double nu, double x) {
  if (!(x > 0.0) || !(nu >= 0.0) || !std::isfinite(x) || !std::isfinite(nu)) {
    throw std::domain_error("bessel_k: requires nu >= 0 and x > 0");
  }
  const double t_peak = std::asinh(nu / x);
  const double radius = std::hypot(x, nu);
  const double g_peak = nu * t_peak - radius;
  // g(t) - g_peak. Near the peak, with d = t - t_peak, it is written without
  // the x cosh t - radius cancellation that costs x * eps at large x.
  auto rel = [&](double t) {
    const double d = t - t_peak;
    if (std::abs(d) >= 1.0) return nu * d - x * std::cosh(t) + radius;
    const double d2 = d * d;
    const double sinh_minus = std::abs(d) < 0.1
                                  ? d * d2 * (1.0 / 6 + d2 * (1.0 / 120 + d2 * (1.0 / 5040 + d2 / 362880)))
                                  : std::sinh(d) - d;
    const double sh = std::sinh(0.5 * d);
    return -nu * sinh_minus - 2.0 * radius * sh * sh;
  };

  // The integrand falls below exp(-46) of its peak outside [lo, hi].
  constexpr double drop = 46.0;
  auto cutoff = [&](double from, double direction) {
    double step = 1.0 / std::sqrt(radius);
    double t = from;
    while (true) {
      const double next = t + direction * step;
      if (direction < 0 && next <= 0.0) return 0.0;
      if (rel(next) < -drop) {
        // bisect the bracket [t, next]
        double inside = t, outside = next;
        for (int i = 0; i < 60; ++i) {
          const double mid = 0.5 * (inside + outside);
          (rel(mid) < -drop ? outside : inside) = mid;
        }
        return outside;
      }
      t = next;
      step *= 2.0;
    }
  };
  const double hi = cutoff(t_peak, 1.0);
  const double lo = t_peak > 0.0 ? cutoff(t_peak, -1.0) : 0.0;

  auto integrand = [&](double t) {
    const double e = std::exp(rel(t));
    return nu == 0.0 ? e : 0.5 * e * (1.0 + std::exp(-2.0 * nu * t));
  };
  const QuadratureSpec spec{1e-300, 1e-13, 4000};
  double scaled = 0.0;
  if (lo < t_peak) scaled += integrate(integrand, lo, t_peak, spec);
  scaled += integrate(integrand, t_peak, hi, spec);
  return g_peak + std::log(scaled);
}

/// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
inline double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

/// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

} // namespace kmsnorm
