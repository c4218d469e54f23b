#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/trigamma.hpp>

#include "kmsnorm/random.hpp"

namespace kmsnorm {

/// Regression coefficients: a finite explicit vector (zero beyond its
/// length) or the hyperbolic sequence beta_j = 1/j.
class BetaSpec {
public:
  enum class Kind { explicit_values, hyperbolic };

  static BetaSpec hyperbolic() { return BetaSpec(Kind::hyperbolic, {}); }

  static BetaSpec explicit_values(std::vector<double> values) {
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("BetaSpec: coefficients must be finite");
    }
    return BetaSpec(Kind::explicit_values, std::move(values));
  }

  Kind kind() const { return kind_; }
  bool is_hyperbolic() const { return kind_ == Kind::hyperbolic; }
  const std::vector<double>& values() const { return values_; }

  /// beta_j for 1-based j.
  double coefficient(std::size_t j) const {
    if (j == 0) throw std::out_of_range("BetaSpec: indices are 1-based");
    if (kind_ == Kind::hyperbolic) return 1.0 / static_cast<double>(j);
    return j <= values_.size() ? values_[j - 1] : 0.0;
  }

  /// (beta_1, ..., beta_p).
  std::vector<double> truncated(std::size_t p) const {
    std::vector<double> out(p);
    for (std::size_t j = 1; j <= p; ++j) out[j - 1] = coefficient(j);
    return out;
  }

  std::string describe() const {
    if (kind_ == Kind::hyperbolic) return "hyperbolic";
    return "explicit[" + std::to_string(values_.size()) + "]";
  }

private:
  BetaSpec(Kind kind, std::vector<double> values) : kind_(kind), values_(std::move(values)) {}

  Kind kind_;
  std::vector<double> values_;
};

/// Load an explicit coefficient vector from a one-column CSV file. A
/// non-numeric first line is treated as a header; blank lines are skipped.
inline BetaSpec load_beta_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open beta file: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t,");
    const std::string field = line.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size()) {
      if (values.empty() && line_no == 1) continue;
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error("beta file has no values: " + path);
  return BetaSpec::explicit_values(std::move(values));
}

/// Data-generating process: n rows of X ~ N_p(0, KMS(rho)), y = X beta + eps.
struct ModelConfig {
  std::int64_t n = 1;
  std::int64_t p = 1;
  double rho = 0.0;
  double sigma_eps2 = 1.0;
  BetaSpec beta = BetaSpec::hyperbolic();

  void validate() const {
    if (n < 1 || p < 1) throw std::invalid_argument("ModelConfig: n and p must be >= 1");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("ModelConfig: |rho| must be < 1");
    if (!(sigma_eps2 > 0.0) || !std::isfinite(sigma_eps2)) {
      throw std::invalid_argument("ModelConfig: sigma_eps2 must be > 0");
    }
  }

  double aspect_ratio() const { return static_cast<double>(p) / static_cast<double>(n); }
};

/// Entry (i, j) of the KMS matrix, rho^|i-j| (identity when rho = 0).
inline double kms_entry(double rho, std::int64_t i, std::int64_t j) {
  if (i == j) return 1.0;
  if (rho == 0.0) return 0.0;
  return std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
}

/// Exact tr(Sigma^2) = sum_{|m|<p} (p - |m|) rho^(2|m|).
inline double kms_trace_sq(double rho, std::int64_t p) {
  if (!(std::abs(rho) < 1.0) || p < 1) throw std::invalid_argument("kms_trace_sq: need |rho| < 1, p >= 1");
  const double q = rho * rho;
  const double pd = static_cast<double>(p);
  if (q == 0.0) return pd;
  // sum_{m=1}^{p-1} (p - m) q^m = q (p (1 - q) - 1 + q^p) / (1 - q)^2
  const double one_minus_q = 1.0 - q;
  const double qp = std::pow(q, pd);
  const double off = q * (pd * one_minus_q - 1.0 + qp) / (one_minus_q * one_minus_q);
  return pd + 2.0 * off;
}

/// sum_{j>p} beta_j^2.
inline double beta_tail_sq(const BetaSpec& beta, std::int64_t p) {
  if (p < 1) throw std::invalid_argument("beta_tail_sq: p must be >= 1");
  if (beta.is_hyperbolic()) {
    // sum_{j>p} j^-2 = psi'(p + 1)
    return boost::math::trigamma(static_cast<double>(p) + 1.0);
  }
  double tail = 0.0;
  const auto& v = beta.values();
  for (std::size_t j = static_cast<std::size_t>(p); j < v.size(); ++j) tail += v[j] * v[j];
  return tail;
}

/// Streams rows (X_i, y_i) of the model using the AR(1) recursion
/// x_1 = eta_1, x_j = rho x_{j-1} + sqrt(1 - rho^2) eta_j, which is exactly
/// N_p(0, KMS(rho)). Each row draws p normals for X then one for eps.
class RowGenerator {
public:
  RowGenerator(const ModelConfig& config, RandomStream& stream)
      : stream_((config.validate(), stream)),
        rho_(config.rho),
        innovation_scale_(std::sqrt(1.0 - config.rho * config.rho)),
        noise_scale_(std::sqrt(config.sigma_eps2)),
        beta_(config.beta.truncated(static_cast<std::size_t>(config.p))) {}

  std::size_t dimension() const { return beta_.size(); }

  /// Fill x (length p) and return y.
  double next(std::span<double> x) {
    if (x.size() != beta_.size()) throw std::invalid_argument("RowGenerator: row buffer has wrong length");
    double prev = stream_.normal();
    x[0] = prev;
    double y = beta_[0] * prev;
    for (std::size_t j = 1; j < x.size(); ++j) {
      prev = rho_ * prev + innovation_scale_ * stream_.normal();
      x[j] = prev;
      y += beta_[j] * prev;
    }
    return y + noise_scale_ * stream_.normal();
  }

private:
  RandomStream& stream_;
  double rho_;
  double innovation_scale_;
  double noise_scale_;
  std::vector<double> beta_;
};

/// One row of the model drawn from `stream`.
inline std::pair<std::vector<double>, double> sample_row(const ModelConfig& config, RandomStream& stream) {
  RowGenerator gen(config, stream);
  std::vector<double> x(static_cast<std::size_t>(config.p));
  const double y = gen.next(x);
  return {std::move(x), y};
}

/// Dense materialization of (X, Y) for small instances, row-major n x p.
struct DenseDataset {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::vector<double> x;
  std::vector<double> y;
};

inline constexpr std::int64_t kDefaultDenseCap = 4'000'000;

inline DenseDataset materialize(const ModelConfig& config, RandomStream& stream,
                                std::int64_t max_entries = kDefaultDenseCap) {
  config.validate();
  if (config.n * config.p > max_entries) {
    throw std::length_error("materialize: n*p exceeds the dense cap of " + std::to_string(max_entries));
  }
  DenseDataset data{config.n, config.p, std::vector<double>(static_cast<std::size_t>(config.n * config.p)),
                    std::vector<double>(static_cast<std::size_t>(config.n))};
  RowGenerator gen(config, stream);
  const auto p = static_cast<std::size_t>(config.p);
  for (std::size_t i = 0; i < static_cast<std::size_t>(config.n); ++i) {
    data.y[i] = gen.next(std::span<double>(data.x).subspan(i * p, p));
  }
  return data;
}

} // namespace kmsnorm
