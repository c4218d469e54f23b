#pragma once

// Verification suites run by `kmsnorm check`: each entry compares a
// production value against an independent oracle and records the gap.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmsnorm/kappa.hpp"
#include "kmsnorm/model.hpp"
#include "kmsnorm/oracle.hpp"
#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/specfun.hpp"
#include "kmsnorm/summation.hpp"
#include "kmsnorm/vg.hpp"

namespace kmsnorm::checks {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool relative = false;
  bool passed = false;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"specfun", "vg", "kappa", "trace"};
  return names;
}

namespace detail {

inline CheckResult compare(std::string suite, std::string name, double value, double reference, double tol,
                           bool relative = false) {
  CheckResult r{std::move(suite), std::move(name), value, reference, 0.0, tol, relative, false};
  r.gap = std::abs(value - reference);
  if (relative) r.gap /= std::max(std::abs(reference), std::numeric_limits<double>::min());
  r.passed = std::isfinite(value) && r.gap <= tol;
  return r;
}

inline std::string fmt(const char* label, double v) { return std::string(label) + "=" + std::to_string(v); }

} // namespace detail

inline const std::vector<double>& rho_grid() {
  static const std::vector<double> g{-0.95, -0.6, 0.0, 0.3, 0.5, 0.7, 0.9};
  return g;
}

inline std::vector<CheckResult> specfun_suite() {
  std::vector<CheckResult> out;
  const std::string s = "specfun";
  // dilog(x) + dilog(-x) = dilog(x^2) / 2
  for (double x : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.999}) {
    out.push_back(detail::compare(s, "duplication " + detail::fmt("x", x), dilog(x) + dilog(-x), 0.5 * dilog(x * x),
                                  1e-10));
  }
  // dilog(x/(x-1)) + dilog(x) = -log^2(1-x)/2
  for (double x : {-0.95, -0.6, -0.3, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95}) {
    const double l = std::log1p(-x);
    out.push_back(detail::compare(s, "landen " + detail::fmt("x", x), dilog(x / (x - 1.0)) + dilog(x), -0.5 * l * l,
                                  1e-10));
  }
  // d/dx dilog(x) = -log(1-x)/x
  for (double x : {-0.85, -0.5, -0.2, 0.2, 0.5, 0.85}) {
    const double h = 1e-5;
    const double fd = oracle::central_difference([](double v) { return dilog(v); }, x, h);
    out.push_back(detail::compare(s, "derivative " + detail::fmt("x", x), fd, -std::log1p(-x) / x, 1e-6));
  }
  // int_0^rho log(1 - rho x) / (x (1 - x)) dx = -(dilog(rho^2) + log^2(1 - rho)) / 2
  for (double rho : {-0.9, -0.5, 0.3, 0.7, 0.95}) {
    auto f = [rho](double x) { return std::log1p(-rho * x) / (x * (1.0 - x)); };
    const double quad = integrate(f, 0.0, rho, QuadratureSpec{1e-14, 1e-12, 2000});
    const double l = std::log1p(-rho);
    out.push_back(detail::compare(s, "log-integral " + detail::fmt("rho", rho), quad,
                                  -0.5 * (dilog(rho * rho) + l * l), 1e-8));
  }
  // K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, summed directly
  for (double nu : {0.0, 0.5, 1.0, 2.5}) {
    for (double x : {0.5, 1.0, 5.0}) {
      // cosh(nu t) expanded so the product never forms 0 * inf far out
      auto f = [nu, x](double t) {
        const double e = -x * std::cosh(t);
        return 0.5 * (std::exp(nu * t + e) + std::exp(-nu * t + e));
      };
      const double quad = integrate_to_infinity(f, 0.0, QuadratureSpec{1e-300, 1e-12, 4000});
      out.push_back(detail::compare(s, "bessel-integral " + detail::fmt("nu", nu) + " " + detail::fmt("x", x),
                                    bessel_k(nu, x), quad, 1e-8, true));
    }
  }
  // half-integer closed form K_{1/2}(x) = sqrt(pi / (2x)) e^{-x}
  for (double x : {1e-3, 0.5, 1.0, 2.0, 10.0, 40.0}) {
    out.push_back(detail::compare(s, "bessel-half " + detail::fmt("x", x), bessel_k(0.5, x),
                                  std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x), 1e-9, true));
  }
  return out;
}

inline std::vector<VgParams> vg_check_params() {
  return {{3.0, 0.5, 1.0, 0.0}, {1.0, 0.5, std::sqrt(0.75), 0.0}, {5.0, -0.4, 0.8, 0.5}, {2.5, 0.0, 1.5, -1.0}};
}

inline std::vector<double> vg_check_abscissae() {
  std::vector<double> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(-4.3 + 0.95 * i);
  return xs;
}

inline std::vector<CheckResult> vg_suite() {
  std::vector<CheckResult> out;
  const std::string s = "vg";
  for (const auto& q : vg_check_params()) {
    const std::string tag = "r=" + std::to_string(q.r) + " theta=" + std::to_string(q.theta) +
                            " sigma=" + std::to_string(q.sigma) + " mu=" + std::to_string(q.mu);
    for (double x : vg_check_abscissae()) {
      out.push_back(detail::compare(s, "pdf-vs-mixture " + tag + " " + detail::fmt("x", x), vg_pdf(q, x),
                                    oracle::vg_pdf_quadrature(q, x), 1e-7));
    }
    auto pdf = [&q](double x) { return x == q.mu ? 0.0 : vg_pdf(q, x); };
    const QuadratureSpec spec{1e-12, 1e-10, 4000};
    const double mass = integrate_from_minus_infinity(pdf, q.mu, spec) + integrate_to_infinity(pdf, q.mu, spec);
    out.push_back(detail::compare(s, "normalization " + tag, mass, 1.0, 1e-6));
  }
  return out;
}

inline std::vector<CheckResult> kappa_suite(std::int64_t max_p = 40) {
  std::vector<CheckResult> out;
  const std::string s = "kappa";
  const std::vector<BetaSpec> betas{BetaSpec::hyperbolic(),
                                    BetaSpec::explicit_values({1.0, -0.5, 0.25, 2.0, 0.0, -1.0, 0.3}),
                                    BetaSpec::explicit_values({1.0, 1.0})};
  for (const auto& beta : betas) {
    for (double rho : rho_grid()) {
      for (std::int64_t p : {std::int64_t{1}, std::int64_t{2}, std::int64_t{7}, std::int64_t{17}, max_p}) {
        ModelConfig c{1, p, rho, 1.0, beta};
        const KappaSet k = kappa_finite(c);
        const std::string tag = beta.describe() + " " + detail::fmt("rho", rho) + " p=" + std::to_string(p);
        out.push_back(detail::compare(s, "kappa1 " + tag, k.kappa1, oracle::kappa1_brute(c), 1e-10, true));
        out.push_back(detail::compare(s, "kappa2 " + tag, k.kappa2, oracle::kappa2_brute(c), 1e-10, true));
        out.push_back(detail::compare(s, "kappa3 " + tag, k.kappa3, oracle::kappa3_brute(c), 1e-10, true));
      }
    }
  }
  for (double rho : rho_grid()) {
    const KappaSet general = kappa_from_series(hyperbolic_series_functions(rho), rho);
    const KappaSet closed = kappa_hyperbolic_closed(rho);
    const std::string tag = detail::fmt("rho", rho);
    out.push_back(detail::compare(s, "limit-routes kappa1 " + tag, general.kappa1, closed.kappa1, 1e-9));
    out.push_back(detail::compare(s, "limit-routes kappa2 " + tag, general.kappa2, closed.kappa2, 1e-9));
    out.push_back(detail::compare(s, "limit-routes kappa3 " + tag, general.kappa3, closed.kappa3, 1e-9));
  }
  return out;
}

inline std::vector<CheckResult> trace_suite() {
  std::vector<CheckResult> out;
  const std::string s = "trace";
  for (double rho : rho_grid()) {
    for (std::int64_t p : {std::int64_t{1}, std::int64_t{2}, std::int64_t{10}, std::int64_t{300}}) {
      out.push_back(detail::compare(s, "trace-sq " + detail::fmt("rho", rho) + " p=" + std::to_string(p),
                                    kms_trace_sq(rho, p), oracle::kms_trace_sq_brute(rho, p), 1e-12, true));
    }
    const double lam = oracle::kms_min_eigenvalue(rho, 60);
    out.push_back(detail::compare(s, "kms-positive-definite " + detail::fmt("rho", rho),
                                  lam > 0.0 ? 0.0 : lam, 0.0, 0.0));
  }
  for (std::int64_t p : {std::int64_t{1}, std::int64_t{10}, std::int64_t{1000}}) {
    CompensatedSum head;
    for (std::int64_t j = 1; j <= p; ++j) head += 1.0 / (static_cast<double>(j) * static_cast<double>(j));
    out.push_back(detail::compare(s, "beta-tail p=" + std::to_string(p), beta_tail_sq(BetaSpec::hyperbolic(), p),
                                  std::numbers::pi * std::numbers::pi / 6.0 - head.value(), 1e-12));
  }
  return out;
}

inline std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "specfun") return specfun_suite();
  if (name == "vg") return vg_suite();
  if (name == "kappa") return kappa_suite();
  if (name == "trace") return trace_suite();
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const auto& n : suite_names()) {
      auto part = run_suite(n);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw std::invalid_argument("unknown check suite '" + name + "'");
}

} // namespace kmsnorm::checks
