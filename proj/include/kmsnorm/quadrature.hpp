#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmsnorm {

/// Error targets for the adaptive integrator.
struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_subdivisions = 2000;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
      throw std::invalid_argument("QuadratureSpec: tolerances must be positive and max_subdivisions >= 1");
    }
  }
};

/// Thrown when the subdivision budget runs out before the tolerance is met.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}

  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

private:
  double estimate_;
  double error_;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule. Abscissae are
// strictly interior, so integrands are never evaluated at panel ends.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
///
/// The panel with the largest error estimate is bisected until the summed
/// error is below max(abs_tol, rel_tol * |result|). Reversed limits follow
/// the usual orientation convention (the integral from a to b with b < a is
/// minus the integral from b to a). Integrable endpoint singularities are
/// tolerated because endpoints are never sampled.
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, spec);
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("integrate: limits must be finite; use integrate_to_infinity");
  }

  std::priority_queue<detail::Panel> panels;
  panels.push(detail::gauss_kronrod_15(f, a, b));
  double total = panels.top().value;
  double error = panels.top().error;

  for (int used = 1;; ++used) {
    if (!std::isfinite(total)) {
      throw QuadratureError("integrate: non-finite integrand value", total, error);
    }
    if (error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) return total;
    if (used >= spec.max_subdivisions) break;

    const detail::Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) break; // panel cannot be split further
    panels.pop();
    const detail::Panel left = detail::gauss_kronrod_15(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);

    // Periodically resum to shed drift from the incremental updates.
    if (used % 64 == 0) {
      auto copy = panels;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  throw QuadratureError("integrate: subdivision budget exhausted (estimate " + std::to_string(total) +
                            ", error " + std::to_string(error) + ")",
                        total, error);
}

/// Integral of f over [a, +inf) via the map x = a + t / (1 - t).
template <typename F>
double integrate_to_infinity(F&& f, double a, const QuadratureSpec& spec = {}) {
  auto mapped = [&](double t) {
    const double s = 1.0 - t;
    const double x = a + t / s;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v / (s * s);
  };
  return integrate(mapped, 0.0, 1.0, spec);
}

/// Integral of f over (-inf, b].
template <typename F>
double integrate_from_minus_infinity(F&& f, double b, const QuadratureSpec& spec = {}) {
  return integrate_to_infinity([&](double x) { return f(-x); }, -b, spec);
}

/// Integral of f over the real line, split at `split`.
template <typename F>
double integrate_real_line(F&& f, double split = 0.0, const QuadratureSpec& spec = {}) {
  return integrate_from_minus_infinity(f, split, spec) + integrate_to_infinity(f, split, spec);
}

} // namespace kmsnorm
