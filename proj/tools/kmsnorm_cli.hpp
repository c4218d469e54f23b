#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmsnorm/kmsnorm.hpp"

namespace kmsnorm::cli {

using nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kThreadsEnv = "KMSNORM_THREADS";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

/// Raised for semantically invalid flag combinations or values.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string beta = "hyperbolic";
  std::string beta_file;
  double rho = 0.0;
  double sigma2 = 4.0;
};

inline void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_sigma) {
  auto* beta = cmd->add_option("--beta", f.beta, "coefficient sequence: 'hyperbolic' (beta_j = 1/j)")
                   ->check(CLI::IsMember({"hyperbolic"}));
  cmd->add_option("--beta-file", f.beta_file, "one-column CSV of explicit coefficients")->excludes(beta);
  cmd->add_option("--rho", f.rho, "KMS correlation, |rho| < 1")->required();
  if (with_sigma) cmd->add_option("--sigma2", f.sigma2, "noise variance sigma_eps^2")->capture_default_str();
}

inline BetaSpec resolve_beta(const ModelFlags& f) {
  if (!f.beta_file.empty()) return load_beta_csv(f.beta_file);
  return BetaSpec::hyperbolic();
}

inline void echo_model(ordered_json& echo, const ModelFlags& f, bool with_sigma) {
  if (f.beta_file.empty()) {
    echo["beta"] = f.beta;
  } else {
    echo["beta-file"] = f.beta_file;
  }
  echo["rho"] = f.rho;
  if (with_sigma) echo["sigma2"] = f.sigma2;
}

inline void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) throw UsageError("--rho must satisfy |rho| < 1");
}

inline ordered_json kappa_json(const KappaSet& k) {
  return {{"kappa1", k.kappa1}, {"kappa2", k.kappa2}, {"kappa3", k.kappa3}};
}

/// Resolve (n, p) from --n and exactly one of --p / --c, with p = round(c n).
inline std::int64_t resolve_p(std::int64_t n, std::optional<std::int64_t> p, std::optional<double> c) {
  if (n < 1) throw UsageError("--n must be >= 1");
  if (p.has_value() == c.has_value()) throw UsageError("give exactly one of --p or --c");
  if (p) {
    if (*p < 1) throw UsageError("--p must be >= 1");
    return *p;
  }
  if (!(*c > 0.0)) throw UsageError("--c must be > 0");
  const auto out = static_cast<std::int64_t>(std::llround(*c * static_cast<double>(n)));
  if (out < 1) throw UsageError("--c * --n rounds to p = 0");
  return out;
}

inline unsigned default_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Envelope {
  std::string command;
  ordered_json config_echo = ordered_json::object();
  ordered_json results = ordered_json::object();
  std::uint64_t seed = 0;
  double timing = 0.0;

  ordered_json to_json() const {
    return {{"schema_version", kSchemaVersion}, {"command", command}, {"config_echo", config_echo},
            {"results", results},              {"seed", seed},       {"timing", timing}};
  }
};

struct Output {
  std::string format = "json";
  std::string out_path;
};

inline void emit(const Envelope& env, const Output& o, std::ostream& out) {
  std::string text;
  if (o.format == "json") {
    text = env.to_json().dump(2) + "\n";
  } else {
    std::ostringstream s;
    s << env.command << "\n";
    for (const auto& [k, v] : env.results.items()) {
      if (v.is_array() && !v.empty() && v.front().is_object()) {
        s << "  " << k << ":\n";
        for (const auto& row : v) s << "    " << row.dump() << "\n";
      } else {
        s << "  " << k << ": " << v.dump() << "\n";
      }
    }
    s << "  timing: " << env.timing << " s\n";
    text = s.str();
  }
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + o.out_path);
  f << text;
}

inline void add_output_flags(CLI::App* cmd, Output& o) {
  cmd->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  cmd->add_option("--out", o.out_path, "write the report to this file instead of stdout");
}

// ---- kappa ---------------------------------------------------------------

struct KappaFlags {
  ModelFlags model;
  std::optional<std::int64_t> p;
  bool limit = false;
  bool both = false;
  bool strict = false;
  std::int64_t truncation = kDefaultSeriesTruncation;
  Output output;
};

inline int cmd_kappa(const KappaFlags& f, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  check_rho(f.model.rho);
  if (f.both) {
    if (!f.p) throw UsageError("--both needs --p");
  } else if (f.p.has_value() == f.limit) {
    throw UsageError("give exactly one of --p or --limit (or --p with --both)");
  }
  if (f.p && *f.p < 1) throw UsageError("--p must be >= 1");
  const BetaSpec beta = resolve_beta(f.model);

  Envelope env;
  env.command = "kappa";
  echo_model(env.config_echo, f.model, false);
  if (f.p) env.config_echo["p"] = *f.p;
  if (f.limit) env.config_echo["limit"] = true;
  if (f.both) env.config_echo["both"] = true;
  if (!beta.is_hyperbolic()) env.config_echo["truncation"] = f.truncation;

  std::vector<std::string> warnings;
  if (f.p) env.results["finite"] = kappa_json(kappa_finite(beta, f.model.rho, *f.p));
  if (f.limit || f.both) {
    const KappaSet lim = kappa_limit(beta, f.model.rho, f.truncation);
    env.results["limit"] = kappa_json(lim);
    warnings = limit_hypothesis_warnings(beta);
    if (f.both) {
      const KappaSet fin = kappa_finite(beta, f.model.rho, *f.p);
      const double root_p = std::sqrt(static_cast<double>(*f.p));
      env.results["scaled_gap"] = {{"kappa1", root_p * std::abs(fin.kappa1 - lim.kappa1)},
                                   {"kappa2", root_p * std::abs(fin.kappa2 - lim.kappa2)},
                                   {"kappa3", root_p * std::abs(fin.kappa3 - lim.kappa3)}};
    }
  }
  env.results["warnings"] = warnings;
  env.timing = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(env, f.output, out);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  return (f.strict && !warnings.empty()) ? kFailure : kOk;
}

// ---- limits --------------------------------------------------------------

struct LimitsFlags {
  ModelFlags model;
  std::int64_t n = 0;
  std::optional<std::int64_t> p;
  std::optional<double> c;
  bool strict = false;
  Output output;
};

inline ordered_json law_json(const LimitLaw& law) {
  return {{"s2", law.s2},
          {"s1_sq", law.s1_sq},
          {"s2_sq", law.s2_sq},
          {"sd", law.sd()},
          {"scale", law.scale},
          {"kappa_limit", kappa_json(law.kappa_limit)},
          {"kappa_finite", kappa_json(law.kappa_finite)}};
}

inline int cmd_limits(const LimitsFlags& f, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  check_rho(f.model.rho);
  if (!(f.model.sigma2 > 0.0)) throw UsageError("--sigma2 must be > 0");
  const std::int64_t p = resolve_p(f.n, f.p, f.c);
  const ModelConfig config{f.n, p, f.model.rho, f.model.sigma2, resolve_beta(f.model)};

  Envelope env;
  env.command = "limits";
  echo_model(env.config_echo, f.model, true);
  env.config_echo["n"] = f.n;
  env.config_echo["p"] = p;

  const LimitLaw law = limit_law(config, CenteringMode::limit);
  env.results["n"] = config.n;
  env.results["p"] = config.p;
  env.results["c"] = law.c;
  env.results["centering"] = {{"finite", centering(config, CenteringMode::finite)}, {"limit", law.centering}};
  env.results.update(law_json(law));
  env.results["warnings"] = law.warnings;
  env.timing = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(env, f.output, out);
  for (const auto& w : law.warnings) err << "warning: " << w << "\n";
  return (f.strict && !law.warnings.empty()) ? kFailure : kOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateFlags {
  ModelFlags model;
  std::int64_t reps = 1000;
  std::uint64_t seed = 42;
  std::int64_t n = 500;
  std::optional<std::int64_t> p;
  std::optional<double> c;
  std::string centering;
  std::string out_prefix;
  std::optional<double> fail_above;
  std::optional<unsigned> threads;
  int grid_points = 512;
  int bins = 40;
  bool strict = false;
  Output output;
};

inline void write_plot_csvs(const McSummary& s, const std::string& prefix) {
  std::ofstream cdf(prefix + "_cdf.csv", std::ios::binary);
  std::ofstream pdf(prefix + "_pdf.csv", std::ios::binary);
  if (!cdf || !pdf) throw std::runtime_error("cannot write CSVs with prefix " + prefix);
  cdf << std::setprecision(17) << "x,empirical_cdf,limit_cdf\n";
  for (const auto& pt : s.empirical_cdf) cdf << pt.x << "," << pt.empirical << "," << pt.limit << "\n";
  pdf << std::setprecision(17) << "center,width,empirical_density,limit_density\n";
  for (const auto& b : s.empirical_pdf) pdf << b.center << "," << b.width << "," << b.empirical << "," << b.limit << "\n";
}

inline int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
  check_rho(f.model.rho);
  if (!(f.model.sigma2 > 0.0)) throw UsageError("--sigma2 must be > 0");
  if (f.reps < 1) throw UsageError("--reps must be >= 1");
  const std::int64_t p = resolve_p(f.n, f.p, f.c);

  McConfig mc;
  mc.model = {f.n, p, f.model.rho, f.model.sigma2, resolve_beta(f.model)};
  mc.reps = f.reps;
  mc.master_seed = f.seed;
  mc.centering_mode = f.centering.empty() ? default_centering(mc.model.beta) : parse_centering_mode(f.centering);
  mc.cdf_grid_points = f.grid_points;
  mc.histogram_bins = f.bins;
  try {
    mc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const unsigned threads = f.threads.value_or(default_threads());
  if (threads < 1) throw UsageError("--threads must be >= 1");

  const McSummary s = run_mc(mc, threads);

  Envelope env;
  env.command = "simulate";
  env.seed = f.seed;
  echo_model(env.config_echo, f.model, true);
  env.config_echo["reps"] = f.reps;
  env.config_echo["seed"] = f.seed;
  env.config_echo["n"] = f.n;
  env.config_echo["p"] = p;
  env.config_echo["centering"] = to_string(mc.centering_mode);
  env.config_echo["grid-points"] = f.grid_points;
  env.config_echo["bins"] = f.bins;
  if (f.fail_above) env.config_echo["fail-above"] = *f.fail_above;

  env.results["ks_distance"] = s.ks_distance;
  env.results["mean"] = s.mean;
  env.results["variance"] = s.variance;
  env.results["reps"] = f.reps;
  env.results["c"] = s.limit.c;
  env.results["centering_mode"] = to_string(s.limit.centering_mode);
  env.results["centering"] = s.limit.centering;
  env.results.update(law_json(s.limit));
  env.results["normalized_values"] = s.normalized_values;
  env.results["warnings"] = s.limit.warnings;
  bool gate_failed = false;
  if (f.fail_above) {
    gate_failed = s.ks_distance > *f.fail_above;
    env.results["gate"] = {{"fail_above", *f.fail_above}, {"passed", !gate_failed}};
  }
  env.timing = s.runtime_seconds;

  if (!f.out_prefix.empty()) write_plot_csvs(s, f.out_prefix);
  emit(env, f.output, out);
  for (const auto& w : s.limit.warnings) err << "warning: " << w << "\n";
  if (gate_failed) {
    err << "ks_distance " << s.ks_distance << " exceeds --fail-above " << *f.fail_above << "\n";
    return kFailure;
  }
  return (f.strict && !s.limit.warnings.empty()) ? kFailure : kOk;
}

// ---- check ---------------------------------------------------------------

struct CheckFlags {
  std::string suite = "all";
  bool verbose = false;
  Output output;
};

inline int cmd_check(const CheckFlags& f, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = checks::run_suite(f.suite);
  Envelope env;
  env.command = "check";
  env.config_echo["suite"] = f.suite;
  ordered_json rows = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.passed) ++failed;
    rows.push_back({{"suite", r.suite},
                    {"identity", r.name},
                    {"value", r.value},
                    {"reference", r.reference},
                    {"gap", r.gap},
                    {"tolerance", r.tolerance},
                    {"relative", r.relative},
                    {"passed", r.passed}});
  }
  env.results["total"] = results.size();
  env.results["failed"] = failed;
  env.results["checks"] = rows;
  env.timing = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit(env, f.output, out);
  for (const auto& r : results) {
    if (!r.passed) err << "FAILED " << r.suite << ": " << r.name << " gap=" << r.gap << " tol=" << r.tolerance << "\n";
  }
  return failed == 0 ? kOk : kFailure;
}

// ---- entry ---------------------------------------------------------------

/// Parse argv and run one subcommand. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limit laws and simulation of ||X'Y||^2 under KMS covariance"};
  app.name("kmsnorm");
  app.require_subcommand(1);

  KappaFlags kf;
  auto* kappa = app.add_subcommand("kappa", "kappa_1, kappa_2, kappa_3 at finite p and/or in the limit");
  add_model_flags(kappa, kf.model, false);
  kappa->add_option("--p", kf.p, "number of regressors for the finite-p sums");
  kappa->add_flag("--limit", kf.limit, "limit constants (p -> infinity)");
  kappa->add_flag("--both", kf.both, "finite, limit and sqrt(p)-scaled gap (needs --p)");
  kappa->add_option("--truncation", kf.truncation, "series truncation for explicit beta")->capture_default_str();
  kappa->add_flag("--strict", kf.strict, "exit 1 on hypothesis warnings");
  add_output_flags(kappa, kf.output);

  LimitsFlags lf;
  auto* limits = app.add_subcommand("limits", "centering and limit variance of the normalized statistic");
  add_model_flags(limits, lf.model, true);
  limits->add_option("--n", lf.n, "sample size")->required();
  auto* lp = limits->add_option("--p", lf.p, "number of regressors");
  limits->add_option("--c", lf.c, "aspect ratio; p = round(c n)")->excludes(lp);
  limits->add_flag("--strict", lf.strict, "exit 1 on hypothesis warnings");
  add_output_flags(limits, lf.output);

  SimulateFlags sf;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo replications against the normal limit");
  add_model_flags(simulate, sf.model, true);
  simulate->add_option("--reps", sf.reps, "replications")->capture_default_str();
  simulate->add_option("--seed", sf.seed, "master seed")->capture_default_str();
  simulate->add_option("--n", sf.n, "sample size")->capture_default_str();
  auto* sp = simulate->add_option("--p", sf.p, "number of regressors");
  simulate->add_option("--c", sf.c, "aspect ratio; p = round(c n)")->excludes(sp);
  simulate->add_option("--centering", sf.centering, "finite | limit (default: limit for hyperbolic beta)")
      ->check(CLI::IsMember({"finite", "limit"}));
  simulate->add_option("--out-prefix", sf.out_prefix, "write <prefix>_cdf.csv and <prefix>_pdf.csv");
  simulate->add_option("--fail-above", sf.fail_above, "exit 1 when the KS distance exceeds this");
  simulate->add_option("--threads", sf.threads, std::string("worker threads (default: $") + kThreadsEnv +
                                                    " or all cores)");
  simulate->add_option("--grid-points", sf.grid_points, "CDF grid size")->capture_default_str();
  simulate->add_option("--bins", sf.bins, "histogram bins")->capture_default_str();
  simulate->add_flag("--strict", sf.strict, "exit 1 on hypothesis warnings");
  add_output_flags(simulate, sf.output);

  CheckFlags cf;
  auto* check = app.add_subcommand("check", "re-verify identities against brute-force oracles");
  check->add_option("--suite", cf.suite, "specfun | vg | kappa | trace | all")
      ->check(CLI::IsMember({"specfun", "vg", "kappa", "trace", "all"}))
      ->capture_default_str();
  add_output_flags(check, cf.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (kappa->parsed()) return cmd_kappa(kf, out, err);
    if (limits->parsed()) return cmd_limits(lf, out, err);
    if (simulate->parsed()) return cmd_simulate(sf, out, err);
    return cmd_check(cf, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

} // namespace kmsnorm::cli
