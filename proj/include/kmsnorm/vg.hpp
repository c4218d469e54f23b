#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/random.hpp"
#include "kmsnorm/specfun.hpp"

namespace kmsnorm {

/// VG(r, theta, sigma, mu): the law of mu + theta W + sigma sqrt(W) U with
/// W ~ Gamma(shape r/2, rate 1/2) and U ~ N(0, 1) independent.
struct VgParams {
  double r = 1.0;
  double theta = 0.0;
  double sigma = 1.0;
  double mu = 0.0;

  void validate() const {
    if (!(r > 0.0) || !(sigma > 0.0) || !std::isfinite(r) || !std::isfinite(sigma) || !std::isfinite(theta) ||
        !std::isfinite(mu)) {
      throw std::domain_error("VgParams: need r > 0, sigma > 0 and finite parameters");
    }
  }

  double mean() const { return mu + r * theta; }
  double variance() const { return r * sigma * sigma + 2.0 * r * theta * theta; }

  friend bool operator==(const VgParams&, const VgParams&) = default;
};

namespace detail {

// Density at x = mu + u, taking the offset directly so integrals near a
// singular mu keep full resolution.
inline double vg_pdf_offset(const VgParams& q, double u) {
  const double nu = 0.5 * (q.r - 1.0);
  const double a = std::hypot(q.theta, q.sigma);
  const double d = std::abs(u);
  const double log_norm = -std::log(q.sigma) - 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * q.r);
  if (d == 0.0) {
    if (nu <= 0.0) throw std::domain_error("vg_pdf: density is unbounded at x = mu when r <= 1");
    const double log_val = log_norm + std::lgamma(nu) - std::log(2.0) + nu * std::log(q.sigma * q.sigma / (a * a));
    return std::exp(log_val);
  }
  const double z = a * d / (q.sigma * q.sigma);
  const double log_val =
      log_norm + q.theta * u / (q.sigma * q.sigma) + nu * std::log(d / (2.0 * a)) + log_bessel_k(std::abs(nu), z);
  return std::exp(log_val);
}

} // namespace detail

/// Density of VG(r, theta, sigma, mu).
///
/// At x = mu the density is finite only for r > 1, where the small-argument
/// limit z^nu K_nu(z) -> Gamma(nu) 2^(nu-1) is used.
inline double vg_pdf(const VgParams& q, double x) {
  q.validate();
  return detail::vg_pdf_offset(q, x - q.mu);
}

/// Characteristic function exp(i mu t) / (1 + sigma^2 t^2 - 2 i theta t)^(r/2).
inline std::complex<double> vg_cf(const VgParams& q, double t) {
  q.validate();
  const std::complex<double> base(1.0 + q.sigma * q.sigma * t * t, -2.0 * q.theta * t);
  return std::exp(std::complex<double>(0.0, q.mu * t)) * std::pow(base, -0.5 * q.r);
}

/// CDF of VG by quadrature of vg_pdf.
inline double vg_cdf(const VgParams& q, double x) {
  q.validate();
  const QuadratureSpec spec{1e-12, 1e-10, 4000};
  auto f = [&](double u) { return u == 0.0 ? 0.0 : detail::vg_pdf_offset(q, u); };
  const double u = x - q.mu;
  if (u <= 0.0) return integrate_from_minus_infinity(f, u, spec);
  return 1.0 - integrate_to_infinity(f, u, spec);
}

/// CDF at each point of an ascending sequence, integrating the density
/// between neighbours so each step is a short panel.
inline std::vector<double> vg_cdf_sorted(const VgParams& q, std::span<const double> xs) {
  q.validate();
  if (!std::is_sorted(xs.begin(), xs.end())) throw std::invalid_argument("vg_cdf_sorted: points must be sorted");
  std::vector<double> out(xs.size());
  if (xs.empty()) return out;
  const QuadratureSpec spec{1e-12, 1e-10, 4000};
  auto f = [&](double u) { return u == 0.0 ? 0.0 : detail::vg_pdf_offset(q, u); };
  double cdf = vg_cdf(q, xs[0]);
  out[0] = cdf;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double lo = xs[i - 1] - q.mu, hi = xs[i] - q.mu;
    if (lo < 0.0 && 0.0 < hi) {
      cdf += integrate(f, lo, 0.0, spec) + integrate(f, 0.0, hi, spec);
    } else {
      cdf += integrate(f, lo, hi, spec);
    }
    out[i] = std::clamp(cdf, 0.0, 1.0);
  }
  return out;
}

/// One draw of mu + theta W + sigma sqrt(W) U.
inline double vg_draw(const VgParams& q, RandomStream& stream) {
  const double w = stream.gamma(0.5 * q.r, 0.5);
  return q.mu + q.theta * w + q.sigma * std::sqrt(w) * stream.normal();
}

/// `count` i.i.d. draws from VG(q).
inline std::vector<double> vg_sample(const VgParams& q, RandomStream& stream, std::size_t count) {
  q.validate();
  if (count < 1) throw std::invalid_argument("vg_sample: count must be >= 1");
  std::vector<double> out(count);
  for (double& v : out) v = vg_draw(q, stream);
  return out;
}

/// Zero-mean bivariate normal with standard deviations sigma1, sigma2 and
/// correlation rho.
struct BivariateGaussianSpec {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;

  void validate() const {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !(std::abs(rho) < 1.0)) {
      throw std::domain_error("BivariateGaussianSpec: need sigma1, sigma2 > 0 and |rho| < 1");
    }
  }
};

/// Law of the sum of n i.i.d. products xi_1 xi_2.
inline VgParams gaussian_product_sum_law(const BivariateGaussianSpec& g, double n) {
  g.validate();
  if (!(n >= 1.0)) throw std::invalid_argument("gaussian_product_sum_law: n must be >= 1");
  const double s = g.sigma1 * g.sigma2;
  return {n, g.rho * s, std::sqrt(1.0 - g.rho * g.rho) * s, 0.0};
}

/// Law of a single product xi_1 xi_2.
inline VgParams gaussian_product_law(const BivariateGaussianSpec& g) { return gaussian_product_sum_law(g, 1.0); }

/// Parameters of the vector (sum_j xi1_j^(k) xi2_j)_{k=1..p}.
struct ProductVectorSpec {
  std::vector<double> rho_cross;    // Corr(xi1^(k), xi2)
  Eigen::MatrixXd rho_within;       // Corr(xi1^(k), xi1^(l))
  std::vector<double> sigma1;       // sd of xi1^(k)
  double sigma2 = 1.0;              // sd of xi2

  std::size_t dimension() const { return rho_cross.size(); }

  void validate() const {
    const auto p = rho_cross.size();
    if (p < 1) throw std::invalid_argument("ProductVectorSpec: p must be >= 1");
    if (sigma1.size() != p || static_cast<std::size_t>(rho_within.rows()) != p ||
        static_cast<std::size_t>(rho_within.cols()) != p) {
      throw std::invalid_argument("ProductVectorSpec: inconsistent dimensions");
    }
    if (!(sigma2 > 0.0)) throw std::invalid_argument("ProductVectorSpec: sigma2 must be > 0");
    for (std::size_t k = 0; k < p; ++k) {
      if (!(std::abs(rho_cross[k]) < 1.0)) throw std::invalid_argument("ProductVectorSpec: |rho^(k)| must be < 1");
      if (!(sigma1[k] > 0.0)) throw std::invalid_argument("ProductVectorSpec: sigma1 entries must be > 0");
      if (std::abs(rho_within(k, k) - 1.0) > 1e-12) {
        throw std::invalid_argument("ProductVectorSpec: rho_within must have unit diagonal");
      }
    }
    if (!rho_within.isApprox(rho_within.transpose(), 1e-12)) {
      throw std::invalid_argument("ProductVectorSpec: rho_within must be symmetric");
    }
  }
};

/// Raised when the residual covariance of U is not positive semi-definite.
class CovarianceError : public std::domain_error {
public:
  CovarianceError(const std::string& what, double min_eigenvalue)
      : std::domain_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
  double min_eigenvalue_;
};

/// Draws of the product-sum vector through the shared-gamma representation
///   sigma1^(k) sigma2 (rho^(k) W_n + sqrt(1 - rho^(k)^2) sqrt(W_n) U_k),
/// W_n ~ Gamma(n/2, 1/2), U ~ N(0, Sigma_U) with
///   Sigma_U(k,l) = (rho^(kl) - rho^(k) rho^(l)) / sqrt((1 - rho^(k)^2)(1 - rho^(l)^2)).
/// The symmetric square root of Sigma_U is computed once at construction.
class ProductVectorSampler {
public:
  explicit ProductVectorSampler(ProductVectorSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto p = static_cast<Eigen::Index>(spec_.dimension());
    Eigen::MatrixXd sigma_u(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
      for (Eigen::Index l = 0; l < p; ++l) {
        const double rk = spec_.rho_cross[k], rl = spec_.rho_cross[l];
        sigma_u(k, l) = (spec_.rho_within(k, l) - rk * rl) / std::sqrt((1.0 - rk * rk) * (1.0 - rl * rl));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_u);
    Eigen::VectorXd lambda = eig.eigenvalues();
    min_eigenvalue_ = lambda.minCoeff();
    if (min_eigenvalue_ < -1e-10) {
      throw CovarianceError("product_vector_sample: Sigma_U is not positive semi-definite (min eigenvalue " +
                                std::to_string(min_eigenvalue_) + ")",
                            min_eigenvalue_);
    }
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    root_ = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    sigma_u_ = std::move(sigma_u);
  }

  const Eigen::MatrixXd& sigma_u() const { return sigma_u_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  std::vector<double> sample(double n, RandomStream& stream) const {
    if (!(n >= 1.0)) throw std::invalid_argument("product_vector_sample: n must be >= 1");
    const auto p = static_cast<Eigen::Index>(spec_.dimension());
    const double w = stream.gamma(0.5 * n, 0.5);
    Eigen::VectorXd z(p);
    for (Eigen::Index k = 0; k < p; ++k) z[k] = stream.normal();
    const Eigen::VectorXd u = root_ * z;
    std::vector<double> out(static_cast<std::size_t>(p));
    const double sw = std::sqrt(w);
    for (Eigen::Index k = 0; k < p; ++k) {
      const double rk = spec_.rho_cross[k];
      out[k] = spec_.sigma1[k] * spec_.sigma2 * (rk * w + std::sqrt(1.0 - rk * rk) * sw * u[k]);
    }
    return out;
  }

private:
  ProductVectorSpec spec_;
  Eigen::MatrixXd sigma_u_;
  Eigen::MatrixXd root_;
  double min_eigenvalue_ = 0.0;
};

inline std::vector<double> product_vector_sample(const ProductVectorSpec& spec, double n, RandomStream& stream) {
  return ProductVectorSampler(spec).sample(n, stream);
}

} // namespace kmsnorm
