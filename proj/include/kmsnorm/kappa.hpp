#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmsnorm/model.hpp"
#include "kmsnorm/specfun.hpp"
#include "kmsnorm/summation.hpp"

namespace kmsnorm {

enum class KappaMode { finite_p, limit };

/// The constants kappa_1, kappa_2, kappa_3, either at finite p or in the
/// p -> infinity limit.
struct KappaSet {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  KappaMode mode = KappaMode::limit;
  std::int64_t p = 0; // only meaningful for finite_p
};

namespace detail {

// u_k = sum_l rho^|k-l| a_l for all k in O(p): forward and backward
// geometric prefix sums share the diagonal term.
inline std::vector<double> kms_apply(std::span<const double> a, double rho) {
  const std::size_t p = a.size();
  std::vector<double> forward(p), out(p);
  double acc = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    acc = rho * acc + a[k];
    forward[k] = acc;
  }
  acc = 0.0;
  for (std::size_t k = p; k-- > 0;) {
    acc = rho * acc + a[k];
    out[k] = forward[k] + acc - a[k];
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

} // namespace detail

/// The profile t_k = sum_{l<=p} beta_l rho^|k-l| together with
/// sigma_Z^2 = kappa_{1,p} + sigma_eps^2. theta_k = t_k / sigma_Z.
struct ThetaProfile {
  std::vector<double> t;
  double sigma_z2 = 0.0;

  std::vector<double> normalized() const {
    std::vector<double> theta(t);
    const double inv = 1.0 / std::sqrt(sigma_z2);
    for (double& v : theta) v *= inv;
    return theta;
  }
};

inline ThetaProfile theta_profile(const ModelConfig& config) {
  config.validate();
  const auto beta = config.beta.truncated(static_cast<std::size_t>(config.p));
  ThetaProfile out;
  out.t = detail::kms_apply(beta, config.rho);
  out.sigma_z2 = detail::dot(beta, out.t) + config.sigma_eps2;
  return out;
}

/// kappa_{1,p}, kappa_{2,p}, kappa_{3,p} for the first p coefficients, O(p).
inline KappaSet kappa_finite(const BetaSpec& beta_spec, double rho, std::int64_t p) {
  if (p < 1) throw std::invalid_argument("kappa_finite: p must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("kappa_finite: |rho| must be < 1");
  const auto beta = beta_spec.truncated(static_cast<std::size_t>(p));
  const auto t = detail::kms_apply(beta, rho);
  const auto u = detail::kms_apply(t, rho);
  return {detail::dot(beta, t), detail::dot(t, t), detail::dot(t, u), KappaMode::finite_p, p};
}

inline KappaSet kappa_finite(const ModelConfig& config) {
  config.validate();
  return kappa_finite(config.beta, config.rho, config.p);
}

/// Series functions of beta evaluated at rho:
/// beta(x) = sum beta_j^2 x^j, b1, b2 and their rho d/drho derivatives.
struct SeriesFunctions {
  double beta_1 = 0.0;       // beta(1)
  double beta_rho = 0.0;     // beta(rho)
  double beta_rho2 = 0.0;    // beta(rho^2)
  double beta_d1_rho2 = 0.0; // beta^(1)(rho^2) = sum j beta_j^2 rho^(2j)
  double b1 = 0.0;           // sum_{j<j'} beta_j beta_j' rho^(j'-j)
  double b2 = 0.0;           // sum_{j'<j} beta_j beta_j' rho^(j+j')
  double b1_d1 = 0.0;        // rho b1'(rho)
  double b2_d1 = 0.0;        // rho b2'(rho)
  double b_d2 = 0.0;         // rho^2 b1'' + rho b1'
  double truncation_error = 0.0;
};

/// Raised when a truncated explicit series cannot be certified to 1e-10.
class TruncationError : public std::runtime_error {
public:
  TruncationError(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

private:
  double bound_;
};

inline constexpr std::int64_t kDefaultSeriesTruncation = 1'000'000;

/// Closed forms of the series for beta_j = 1/j.
inline SeriesFunctions hyperbolic_series_functions(double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("series_functions: |rho| must be < 1");
  const double l = std::log1p(-rho);
  const double l2 = std::log1p(-rho * rho);
  const double li = dilog(rho);
  const double li_sq = dilog(rho * rho);
  SeriesFunctions s;
  s.beta_1 = std::numbers::pi * std::numbers::pi / 6.0;
  s.beta_rho = li;
  s.beta_rho2 = li_sq;
  s.beta_d1_rho2 = -l2;
  s.b1 = 0.5 * l * l + li;
  s.b2 = 0.5 * (l * l - li_sq);
  s.b1_d1 = -l / (1.0 - rho);
  s.b2_d1 = l2 - rho * l / (1.0 - rho);
  s.b_d2 = (rho - rho * l) / ((1.0 - rho) * (1.0 - rho));
  return s;
}

/// Series by direct summation over the first `truncation` coefficients,
/// using O(L) prefix recursions. Throws TruncationError when the dropped
/// tail could move any quantity by more than 1e-10.
inline SeriesFunctions summed_series_functions(std::span<const double> beta, double rho,
                                               std::int64_t truncation = kDefaultSeriesTruncation) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("series_functions: |rho| must be < 1");
  if (truncation < 1) throw std::invalid_argument("series_functions: truncation must be >= 1");
  const std::size_t len = std::min(beta.size(), static_cast<std::size_t>(truncation));

  SeriesFunctions s;
  CompensatedSum beta_1, beta_rho, beta_rho2, beta_d1, b1, b2, b1_d1, b2_d1, b_d2;
  // A = sum_{j<=k} beta_j rho^(k-j), B and C weight by (k-j) and (k-j)^2.
  // D = sum_{j<=k} beta_j rho^j, E = sum_{j<=k} j beta_j rho^j.
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
  double rho_pow = 1.0;  // rho^k
  double rho2_pow = 1.0; // rho^(2k)
  for (std::size_t idx = 0; idx < len; ++idx) {
    const double k = static_cast<double>(idx + 1);
    const double bk = beta[idx];
    rho_pow *= rho;
    rho2_pow *= rho * rho;
    beta_1 += bk * bk;
    beta_rho += bk * bk * rho_pow;
    beta_rho2 += bk * bk * rho2_pow;
    beta_d1 += k * bk * bk * rho2_pow;

    // pairs (j, k) with j < k, weights rho^(k-j) (k-j)^m
    const double s0 = rho * a;
    const double s1 = rho * (b + a);
    const double s2 = rho * (c + 2.0 * b + a);
    b1 += bk * s0;
    b1_d1 += bk * s1;
    b_d2 += bk * s2;
    // pairs (j', k) with j' < k, weights rho^(k+j') (k+j')
    b2 += bk * rho_pow * d;
    b2_d1 += bk * rho_pow * (k * d + e);

    a = s0 + bk;
    b = s1;
    c = s2;
    d += bk * rho_pow;
    e += k * bk * rho_pow;
  }
  s.beta_1 = beta_1.value();
  s.beta_rho = beta_rho.value();
  s.beta_rho2 = beta_rho2.value();
  s.beta_d1_rho2 = beta_d1.value();
  s.b1 = b1.value();
  s.b2 = b2.value();
  s.b1_d1 = b1_d1.value();
  s.b2_d1 = b2_d1.value();
  s.b_d2 = b_d2.value();

  double tail = 0.0;
  for (std::size_t idx = len; idx < beta.size(); ++idx) tail += beta[idx] * beta[idx];
  if (tail > 0.0) {
    // Cauchy-Schwarz on the dropped pairs; sum_m |rho|^m m^2 <= 2 / (1-|rho|)^3.
    const double r = std::abs(rho);
    const double weight = 2.0 / ((1.0 - r) * (1.0 - r) * (1.0 - r));
    s.truncation_error = 2.0 * weight * (std::sqrt(tail * (s.beta_1 + tail)) + tail);
    if (s.truncation_error > 1e-10) {
      throw TruncationError("series_functions: truncation error bound " + std::to_string(s.truncation_error) +
                                " exceeds 1e-10; raise the truncation",
                            s.truncation_error);
    }
  }
  return s;
}

inline SeriesFunctions series_functions(const BetaSpec& beta, double rho,
                                        std::int64_t truncation = kDefaultSeriesTruncation) {
  if (beta.is_hyperbolic()) return hyperbolic_series_functions(rho);
  return summed_series_functions(beta.values(), rho, truncation);
}

/// Limit constants assembled from the series (the general identities).
inline KappaSet kappa_from_series(const SeriesFunctions& s, double rho) {
  const double r2 = rho * rho;
  const double d = 1.0 - r2;
  KappaSet k;
  k.mode = KappaMode::limit;
  k.kappa1 = s.beta_1 + 2.0 * s.b1;
  k.kappa2 = s.beta_1 * (1.0 + r2) / d - s.beta_rho2 / d + 2.0 * (s.b1_d1 + s.b1 * (1.0 + r2) / d - s.b2 / d);
  k.kappa3 = ((1.0 + 4.0 * r2 + r2 * r2) * (s.beta_1 + 2.0 * s.b1) - (1.0 + 3.0 * r2) * (s.beta_rho2 + 2.0 * s.b2)) /
                 (d * d) +
             (3.0 * s.b1_d1 * (1.0 + r2) - 2.0 * (s.b2_d1 + s.beta_d1_rho2)) / d + s.b_d2;
  return k;
}

/// Simplified closed forms for beta_j = 1/j.
inline KappaSet kappa_hyperbolic_closed(double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("kappa_hyperbolic_closed: |rho| must be < 1");
  const double r2 = rho * rho;
  const double d = 1.0 - r2;
  const double l = std::log1p(-rho);
  KappaSet k;
  k.mode = KappaMode::limit;
  k.kappa1 = std::numbers::pi * std::numbers::pi / 6.0 + l * l + 2.0 * dilog(rho);
  k.kappa2 = ((1.0 + r2) * k.kappa1 - l * l - 2.0 * (1.0 + rho) * l) / d;
  k.kappa3 = k.kappa2 * (1.0 + 3.0 * r2) / d +
             ((-1.0 + rho + 2.0 * r2) * (1.0 + rho) * l + rho * (1.0 + rho) * (1.0 + rho) - 2.0 * r2 * r2 * k.kappa1) /
                 (d * d);
  return k;
}

/// Limit constants. For hyperbolic beta both routes are evaluated and must
/// agree to 1e-9 (relative to max(1, |kappa|)); a mismatch is a logic error.
inline KappaSet kappa_limit(const BetaSpec& beta, double rho,
                            std::int64_t truncation = kDefaultSeriesTruncation) {
  const KappaSet general = kappa_from_series(series_functions(beta, rho, truncation), rho);
  if (!beta.is_hyperbolic()) return general;
  const KappaSet closed = kappa_hyperbolic_closed(rho);
  auto agree = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
  if (!agree(general.kappa1, closed.kappa1) || !agree(general.kappa2, closed.kappa2) ||
      !agree(general.kappa3, closed.kappa3)) {
    throw std::logic_error("kappa_limit: general and closed-form routes disagree at rho=" + std::to_string(rho));
  }
  return closed;
}

} // namespace kmsnorm
