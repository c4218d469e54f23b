#pragma once

// Brute-force reference implementations. Each one avoids the production
// algorithm it checks: literal nested sums instead of prefix recursions,
// gamma-mixture quadrature instead of the Bessel density, explicit matrix
// products instead of streaming accumulation. They are shipped so the CLI
// `check` command can re-verify results without the test tree.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kmsnorm/model.hpp"
#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/random.hpp"
#include "kmsnorm/vg.hpp"

namespace kmsnorm::oracle {

struct OracleBudget {
  std::int64_t max_p_quartic = 40;
  std::int64_t max_dense_np = 200;
  std::int64_t mc_trials = 100'000;
};

class BudgetExceeded : public std::length_error {
public:
  using std::length_error::length_error;
};

namespace detail {

inline double kms(double rho, std::int64_t i, std::int64_t j) {
  const auto d = i > j ? i - j : j - i;
  return d == 0 ? 1.0 : std::pow(rho, static_cast<double>(d));
}

inline std::vector<double> betas(const ModelConfig& c) {
  std::vector<double> b(static_cast<std::size_t>(c.p));
  for (std::int64_t j = 1; j <= c.p; ++j) b[static_cast<std::size_t>(j - 1)] = c.beta.coefficient(static_cast<std::size_t>(j));
  return b;
}

} // namespace detail

/// sum_{k,l} beta_k beta_l rho^|k-l|, literal double loop.
inline double kappa1_brute(const ModelConfig& c) {
  const auto b = detail::betas(c);
  long double s = 0.0L;
  for (std::int64_t k = 0; k < c.p; ++k)
    for (std::int64_t l = 0; l < c.p; ++l) s += static_cast<long double>(b[k]) * b[l] * detail::kms(c.rho, k, l);
  return static_cast<double>(s);
}

/// sum_k (sum_l beta_l rho^|k-l|)^2, literal loops.
inline double kappa2_brute(const ModelConfig& c) {
  const auto b = detail::betas(c);
  long double s = 0.0L;
  for (std::int64_t k = 0; k < c.p; ++k) {
    long double inner = 0.0L;
    for (std::int64_t l = 0; l < c.p; ++l) inner += static_cast<long double>(b[l]) * detail::kms(c.rho, k, l);
    s += inner * inner;
  }
  return static_cast<double>(s);
}

/// sum_{k,l,j,j'} beta_j beta_j' rho^|k-j| rho^|l-j'| rho^|k-l|, literal
/// quadruple loop.
inline double kappa3_brute(const ModelConfig& c, const OracleBudget& budget = {}) {
  if (c.p > budget.max_p_quartic) {
    throw BudgetExceeded("kappa3_brute: p=" + std::to_string(c.p) + " exceeds budget " +
                         std::to_string(budget.max_p_quartic));
  }
  const auto b = detail::betas(c);
  long double s = 0.0L;
  for (std::int64_t k = 0; k < c.p; ++k)
    for (std::int64_t l = 0; l < c.p; ++l)
      for (std::int64_t j = 0; j < c.p; ++j)
        for (std::int64_t jp = 0; jp < c.p; ++jp)
          s += static_cast<long double>(b[j]) * b[jp] * detail::kms(c.rho, k, j) * detail::kms(c.rho, l, jp) *
               detail::kms(c.rho, k, l);
  return static_cast<double>(s);
}

/// tr(Sigma^2) as the literal double sum over entries.
inline double kms_trace_sq_brute(double rho, std::int64_t p) {
  long double s = 0.0L;
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t j = 0; j < p; ++j) s += static_cast<long double>(detail::kms(rho * rho, i, j));
  return static_cast<double>(s);
}

/// Smallest eigenvalue of the explicit p x p KMS matrix.
inline double kms_min_eigenvalue(double rho, std::int64_t p) {
  Eigen::MatrixXd m(p, p);
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t j = 0; j < p; ++j) m(i, j) = detail::kms(rho, i, j);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// VG density as the gamma mixture
///   int_0^inf phi((x - mu - theta w) / (sigma sqrt w)) / (sigma sqrt w) g(w) dw,
/// g the Gamma(r/2, rate 1/2) density.
inline double vg_pdf_quadrature(const VgParams& q, double x) {
  q.validate();
  const double shape = 0.5 * q.r;
  const double log_gamma_norm = -shape * std::log(2.0) - std::lgamma(shape);
  auto integrand = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double sw = q.sigma * std::sqrt(w);
    const double z = (x - q.mu - q.theta * w) / sw;
    const double log_val = -0.5 * z * z - 0.5 * std::log(2.0 * M_PI) - std::log(sw) + log_gamma_norm +
                           (shape - 1.0) * std::log(w) - 0.5 * w;
    return std::exp(log_val);
  };
  const QuadratureSpec spec{1e-14, 1e-11, 8000};
  // Split at the mixture's bulk so the mapped tail panel stays smooth.
  const double split = std::max(1.0, q.r);
  return integrate(integrand, 0.0, split, spec) + integrate_to_infinity(integrand, split, spec);
}

/// ||X'Y||^2 from the materialized n x p design via an explicit matrix
/// product. Uses the same row stream as the streaming statistic.
inline double dense_statistic(const ModelConfig& c, RandomStream& stream, const OracleBudget& budget = {}) {
  if (c.n * c.p > budget.max_dense_np * budget.max_dense_np) {
    throw BudgetExceeded("dense_statistic: n*p exceeds budget");
  }
  const DenseDataset data = materialize(c, stream);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      data.x.data(), data.n, data.p);
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), data.n);
  const Eigen::VectorXd xty = x.transpose() * y;
  return xty.squaredNorm();
}

/// Residual covariance matrix of U and its smallest eigenvalue. Reports,
/// never throws, on indefiniteness.
struct SigmaUDiagnostics {
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
};

inline SigmaUDiagnostics sigma_u_matrix(const ProductVectorSpec& spec) {
  const auto p = static_cast<Eigen::Index>(spec.dimension());
  SigmaUDiagnostics out;
  out.matrix.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index l = 0; l < p; ++l) {
      const double num = spec.rho_within(k, l) - spec.rho_cross[k] * spec.rho_cross[l];
      const double den = std::sqrt(1.0 - spec.rho_cross[k] * spec.rho_cross[k]) *
                         std::sqrt(1.0 - spec.rho_cross[l] * spec.rho_cross[l]);
      out.matrix(k, l) = num / den;
    }
  }
  out.min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.matrix, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return out;
}

/// ProductVectorSpec of the regression: xi1^(k) = X_k, xi2 = Z = X'beta + eps,
/// so rho^(kl) = rho^|k-l| and rho^(k) = theta_k.
inline ProductVectorSpec regression_product_spec(const ModelConfig& c) {
  const auto b = detail::betas(c);
  const auto p = static_cast<Eigen::Index>(c.p);
  std::vector<double> t(b.size(), 0.0);
  double sigma_z2 = c.sigma_eps2;
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index l = 0; l < p; ++l) t[k] += b[l] * detail::kms(c.rho, k, l);
    sigma_z2 += b[k] * t[k];
  }
  ProductVectorSpec spec;
  spec.rho_within.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k)
    for (Eigen::Index l = 0; l < p; ++l) spec.rho_within(k, l) = detail::kms(c.rho, k, l);
  spec.sigma2 = std::sqrt(sigma_z2);
  spec.sigma1.assign(b.size(), 1.0);
  spec.rho_cross.resize(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) spec.rho_cross[k] = t[k] / spec.sigma2;
  return spec;
}

/// Exact E||X'Y||^2 = (n^2 + n) kappa_{2,p} + p n (kappa_{1,p} + sigma_eps^2),
/// from E H_k^2 = n (sigma_Z^2 + 2 t_k^2) + n (n - 1) t_k^2.
inline double exact_statistic_mean(const ModelConfig& c) {
  const double n = static_cast<double>(c.n), p = static_cast<double>(c.p);
  return (n * n + n) * kappa2_brute(c) + p * n * (kappa1_brute(c) + c.sigma_eps2);
}

/// Central difference of f at x with step h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Second central difference of f at x with step h.
inline double second_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace kmsnorm::oracle
