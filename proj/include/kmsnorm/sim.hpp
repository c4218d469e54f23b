#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "kmsnorm/limitlaw.hpp"
#include "kmsnorm/model.hpp"
#include "kmsnorm/random.hpp"
#include "kmsnorm/specfun.hpp"
#include "kmsnorm/summation.hpp"

namespace kmsnorm {

/// ||X'Y||^2 = sum_k H_k^2 with H_k = sum_i X_{k,i} y_i, streamed row by row
/// into a length-p compensated accumulator. O(np) time, O(p) memory.
inline double statistic(const ModelConfig& config, RandomStream& stream) {
  RowGenerator gen(config, stream);
  const auto p = static_cast<std::size_t>(config.p);
  std::vector<double> x(p), h(p, 0.0), comp(p, 0.0);
  for (std::int64_t i = 0; i < config.n; ++i) {
    const double y = gen.next(x);
    for (std::size_t k = 0; k < p; ++k) {
      // Kahan step for H_k += x_k y
      const double v = x[k] * y - comp[k];
      const double t = h[k] + v;
      comp[k] = (t - h[k]) - v;
      h[k] = t;
    }
  }
  CompensatedSum total;
  for (std::size_t k = 0; k < p; ++k) total += h[k] * h[k];
  return total.value();
}

/// (||X'Y||^2 - centering) / n^{3/2}.
inline double normalized_statistic(const ModelConfig& config, const LimitLaw& law, RandomStream& stream) {
  return (statistic(config, stream) - law.centering) / law.scale;
}

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of a
/// sorted sample and N(0, s^2), evaluated at the jump points.
inline double ks_distance(std::span<const double> sorted_sample, double s) {
  if (!(s > 0.0)) throw std::domain_error("ks_distance: s must be > 0");
  if (sorted_sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  if (!std::is_sorted(sorted_sample.begin(), sorted_sample.end())) {
    throw std::invalid_argument("ks_distance: sample must be sorted");
  }
  const double n = static_cast<double>(sorted_sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double f = normal_cdf(sorted_sample[i] / s);
    const double upper = static_cast<double>(i + 1) / n;
    const double lower = static_cast<double>(i) / n;
    d = std::max({d, std::abs(upper - f), std::abs(f - lower)});
  }
  return d;
}

struct McConfig {
  ModelConfig model;
  std::int64_t reps = 1000;
  std::uint64_t master_seed = 42;
  CenteringMode centering_mode = CenteringMode::limit;
  int cdf_grid_points = 512;
  int histogram_bins = 40;

  void validate() const {
    model.validate();
    if (reps < 1) throw std::invalid_argument("McConfig: reps must be >= 1");
    if (cdf_grid_points < 2) throw std::invalid_argument("McConfig: cdf_grid_points must be >= 2");
    if (histogram_bins < 1) throw std::invalid_argument("McConfig: histogram_bins must be >= 1");
  }
};

struct CdfPoint {
  double x;
  double empirical;
  double limit;
};

struct PdfBin {
  double center;
  double width;
  double empirical;
  double limit;
};

struct McSummary {
  std::vector<double> normalized_values; // ascending
  double ks_distance = 0.0;
  double mean = 0.0;
  double variance = 0.0; // unbiased sample variance (0 when reps = 1)
  LimitLaw limit;
  std::vector<CdfPoint> empirical_cdf;
  std::vector<PdfBin> empirical_pdf;
  double runtime_seconds = 0.0;
};

/// The stream for replication `index` under `master_seed`.
inline RandomStream replication_stream(std::uint64_t master_seed, std::uint64_t index) {
  return RandomStream(master_seed, index);
}

namespace detail {

// Plot range: [min, max] padded by 5% each side, or +-sd around the point
// when the sample is degenerate.
inline std::pair<double, double> padded_range(std::span<const double> sorted, double sd) {
  double lo = sorted.front(), hi = sorted.back();
  if (hi > lo) {
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
  }
  return {lo - sd, hi + sd};
}

inline std::vector<CdfPoint> cdf_grid(std::span<const double> sorted, double sd, int points) {
  const auto [lo, hi] = padded_range(sorted, sd);
  std::vector<CdfPoint> grid(static_cast<std::size_t>(points));
  const double n = static_cast<double>(sorted.size());
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    grid[static_cast<std::size_t>(i)] = {x, static_cast<double>(count) / n, normal_cdf(x / sd)};
  }
  return grid;
}

inline std::vector<PdfBin> histogram(std::span<const double> sorted, double sd, int bins) {
  const auto [lo, hi] = padded_range(sorted, sd);
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : sorted) {
    auto b = static_cast<std::ptrdiff_t>((v - lo) / width);
    b = std::clamp<std::ptrdiff_t>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double n = static_cast<double>(sorted.size());
  std::vector<PdfBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    const double center = lo + (b + 0.5) * width;
    out[static_cast<std::size_t>(b)] = {center, width, static_cast<double>(counts[static_cast<std::size_t>(b)]) / (n * width),
                                        normal_pdf(center / sd) / sd};
  }
  return out;
}

} // namespace detail

/// Monte-Carlo replication of the normalized statistic.
///
/// Replication i draws from the stream (master_seed, i) and writes slot i of
/// the result vector, so the summary is identical for any worker count.
inline McSummary run_mc(const McConfig& mc, unsigned threads = 1) {
  mc.validate();
  const auto start = std::chrono::steady_clock::now();
  McSummary out;
  out.limit = limit_law(mc.model, mc.centering_mode);

  std::vector<double> values(static_cast<std::size_t>(mc.reps));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::int64_t i = next++; i < mc.reps; i = next++) {
        RandomStream stream = replication_stream(mc.master_seed, static_cast<std::uint64_t>(i));
        values[static_cast<std::size_t>(i)] = normalized_statistic(mc.model, out.limit, stream);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = mc.reps;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(mc.reps)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  CompensatedSum sum;
  for (double v : values) sum += v;
  out.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.variance = sq.value() / static_cast<double>(values.size() - 1);
  }

  std::sort(values.begin(), values.end());
  const double sd = out.limit.sd();
  out.ks_distance = ks_distance(values, sd);
  out.empirical_cdf = detail::cdf_grid(values, sd, mc.cdf_grid_points);
  out.empirical_pdf = detail::histogram(values, sd, mc.histogram_bins);
  out.normalized_values = std::move(values);
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace kmsnorm
