#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmsnorm/kappa.hpp"
#include "kmsnorm/model.hpp"

namespace kmsnorm {

enum class CenteringMode { finite, limit };

inline std::string to_string(CenteringMode mode) { return mode == CenteringMode::finite ? "finite" : "limit"; }

inline CenteringMode parse_centering_mode(const std::string& s) {
  if (s == "finite") return CenteringMode::finite;
  if (s == "limit") return CenteringMode::limit;
  throw std::invalid_argument("centering mode must be 'finite' or 'limit', got '" + s + "'");
}

/// Default centering: limit constants for hyperbolic beta, finite otherwise.
inline CenteringMode default_centering(const BetaSpec& beta) {
  return beta.is_hyperbolic() ? CenteringMode::limit : CenteringMode::finite;
}

struct VarianceParts {
  double s2 = 0.0;
  double s1_sq = 0.0;
  double s2_sq = 0.0;
};

/// Limit variance s^2 = s1^2 + s2^2 of the normalized statistic.
inline VarianceParts variance_s2(const KappaSet& k, double c, double sigma_eps2, double rho) {
  if (!(c > 0.0)) throw std::domain_error("variance_s2: c must be > 0");
  if (!(std::abs(rho) < 1.0)) throw std::domain_error("variance_s2: |rho| must be < 1");
  if (!(sigma_eps2 > 0.0)) throw std::domain_error("variance_s2: sigma_eps2 must be > 0");
  const double m = k.kappa1 + sigma_eps2; // sigma_2^2
  const double ratio = (1.0 + rho * rho) / (1.0 - rho * rho);
  VarianceParts v;
  v.s2 = 4.0 * k.kappa2 * k.kappa2 + 4.0 * m * (2.0 * k.kappa2 * c + k.kappa3) + 2.0 * c * m * m * (c + ratio);
  v.s1_sq = 8.0 * k.kappa2 * k.kappa2 + 8.0 * c * m * k.kappa2 + 2.0 * c * c * m * m;
  v.s2_sq = 2.0 * c * ratio * m * m + 4.0 * m * k.kappa3 - 4.0 * k.kappa2 * k.kappa2;
  if (!(v.s2 > 0.0)) throw std::domain_error("variance_s2: non-positive s^2, inconsistent kappa inputs");
  if (std::abs(v.s2 - (v.s1_sq + v.s2_sq)) > 1e-9 * std::max(1.0, v.s2)) {
    throw std::logic_error("variance_s2: s1^2 + s2^2 does not reproduce s^2");
  }
  return v;
}

/// Whether the finite-p tail hypotheses behind the limit centering can be
/// certified for this coefficient sequence. Empty when they can.
inline std::vector<std::string> limit_hypothesis_warnings(const BetaSpec& beta) {
  if (beta.is_hyperbolic()) return {}; // |beta_j| j = 1, tail ~ 1/p = o(p^-1/2)
  return {"explicit beta: the tail condition sum_{j>p} beta_j^2 = o(p^-1/2) and the decay "
          "sup_j |beta_j| j^alpha < inf (alpha > 1/2) cannot be certified from a finite vector"};
}

/// Value subtracted from ||X'Y||^2 before scaling by n^{3/2}.
inline double centering(const ModelConfig& config, CenteringMode mode) {
  config.validate();
  const double n = static_cast<double>(config.n);
  const double p = static_cast<double>(config.p);
  if (mode == CenteringMode::finite) {
    const KappaSet k = kappa_finite(config);
    return n * n * k.kappa2 + p * n * (k.kappa1 + config.sigma_eps2);
  }
  const KappaSet k = kappa_limit(config.beta, config.rho);
  return n * n * (k.kappa2 + (p / n) * (k.kappa1 + config.sigma_eps2));
}

struct LimitLaw {
  double centering = 0.0;
  double scale = 0.0; // n^{3/2}
  double s2 = 0.0;
  double s1_sq = 0.0;
  double s2_sq = 0.0;
  double c = 0.0; // p / n
  CenteringMode centering_mode = CenteringMode::limit;
  KappaSet kappa_limit;
  KappaSet kappa_finite;
  std::vector<std::string> warnings;

  double sd() const { return std::sqrt(s2); }
};

/// Centering, scale and variance of the normal limit for `config`.
inline LimitLaw limit_law(const ModelConfig& config, CenteringMode mode) {
  config.validate();
  LimitLaw law;
  law.c = config.aspect_ratio();
  law.centering_mode = mode;
  law.scale = std::pow(static_cast<double>(config.n), 1.5);
  law.kappa_limit = kappa_limit(config.beta, config.rho);
  law.kappa_finite = kappa_finite(config);
  const VarianceParts v = variance_s2(law.kappa_limit, law.c, config.sigma_eps2, config.rho);
  law.s2 = v.s2;
  law.s1_sq = v.s1_sq;
  law.s2_sq = v.s2_sq;

  const double n = static_cast<double>(config.n);
  const double p = static_cast<double>(config.p);
  if (mode == CenteringMode::finite) {
    law.centering = n * n * law.kappa_finite.kappa2 + p * n * (law.kappa_finite.kappa1 + config.sigma_eps2);
  } else {
    law.centering = n * n * (law.kappa_limit.kappa2 + law.c * (law.kappa_limit.kappa1 + config.sigma_eps2));
    law.warnings = limit_hypothesis_warnings(config.beta);
  }
  return law;
}

} // namespace kmsnorm
