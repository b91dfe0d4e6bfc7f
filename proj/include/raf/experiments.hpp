#pragma once

// Monte-Carlo experiment harness: success-rate phase transitions, NMSE vs SNR,
// initialization quality comparisons, loss histograms at m = 2n-1, and the CDP
// recovery pipeline. Trial j of sweep point s always draws its randomness from
// the substream derive_stream(master_seed, tag, s, j), so trials are isolated
// and execution order (including thread scheduling) cannot change a report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "raf/config_json.hpp"
#include "raf/core.hpp"
#include "raf/init.hpp"
#include "raf/metrics.hpp"
#include "raf/rng.hpp"
#include "raf/sensing.hpp"
#include "raf/solver.hpp"

namespace raf {

struct RunConfig {
  InitConfig init;
  SolverConfig solver;
};

inline RunConfig run_defaults(ModelKind kind) {
  RunConfig c;
  c.solver = SolverConfig::for_model(kind);
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"init", to_json(c.init)}, {"solver", to_json(c.solver)}};
}

struct ExperimentReport {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string config_hash;  // hex FNV-1a of the canonical spec JSON
  nlohmann::json meta;      // spec, seeds, per-trial details
};

// Shortest round-trip-exact decimal form.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = 0.0;
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == v) return shorter;
  }
  return buf;
}

inline std::string hash_hex(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(rng::fnv1a(j.dump())));
  return buf;
}

// CSV: header row, one row per sweep point, '.' decimal separator, UTF-8.
inline void write_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < report.columns.size(); ++c)
    out << (c ? "," : "") << report.columns[c];
  out << ",config_hash\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << "," << report.config_hash << "\n";
  }
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) rows.push_back(row);
  return {{"experiment", report.experiment},
          {"columns", report.columns},
          {"rows", rows},
          {"config_hash", report.config_hash},
          {"meta", report.meta}};
}

inline void write_json(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_json(report).dump(2) << "\n";
}

// Index-based parallel loop; results must be written to per-index slots.
template <class Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<Index>(threads, count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

struct TrialOutcome {
  bool success = false;
  double relative_error = 0.0;
  double nmse = 0.0;
  double residual = 0.0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
};

// One full init+solve trial on a freshly sampled instance.
template <class Scalar>
TrialOutcome run_trial(ModelKind kind, Index n, Index m_or_K, double noise_sigma_or_snr,
                       bool sigma_is_snr, std::uint64_t trial_seed, const RunConfig& run,
                       double success_threshold) {
  const auto model = sample_model<Scalar>(kind, n, m_or_K, rng::derive_stream(trial_seed, "A"));
  const Vec<Scalar> x = random_signal<Scalar>(n, rng::derive_stream(trial_seed, "x"));
  double sigma = noise_sigma_or_snr;
  if (sigma_is_snr) sigma = sigma_for_snr(model, x, noise_sigma_or_snr);
  const auto inst = measure(model, x, sigma, trial_seed);
  const auto init = initialize(inst, run.init);
  const auto sol = solve(inst, init.z0, run.solver);
  const auto eval = evaluate(inst, sol.z_final, success_threshold);
  TrialOutcome out;
  out.success = eval.success;
  out.relative_error = eval.relative_error;
  out.nmse = eval.nmse;
  out.residual = eval.residual;
  out.final_loss = loss(inst, sol.z_final);
  out.seed = trial_seed;
  return out;
}

inline nlohmann::json trials_to_json(const std::vector<TrialOutcome>& trials) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : trials)
    arr.push_back({{"seed", t.seed},
                   {"success", t.success},
                   {"relative_error", t.relative_error},
                   {"nmse", t.nmse},
                   {"residual", t.residual},
                   {"loss", t.final_loss}});
  return arr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Success rate vs m/n

struct SuccessRateSpec {
  ModelKind kind = ModelKind::RealGaussian;
  Index n = 200;
  std::vector<double> ratios;  // m/n values
  int trials = 100;
  std::uint64_t master_seed = 1;
  RunConfig run = run_defaults(ModelKind::RealGaussian);
  double success_threshold = 1e-5;
  int threads = 1;
};

inline nlohmann::json to_json(const SuccessRateSpec& s) {
  return {{"experiment", "success-rate"}, {"model", to_string(s.kind)},
          {"n", s.n},                     {"ratios", s.ratios},
          {"trials", s.trials},           {"master_seed", s.master_seed},
          {"run", to_json(s.run)},        {"success_threshold", s.success_threshold}};
}

template <class Scalar = double>
ExperimentReport run_success_rate(const SuccessRateSpec& spec) {
  if (spec.trials < 1 || spec.ratios.empty())
    throw std::invalid_argument("run_success_rate: need trials >= 1 and a nonempty ratio list");
  ExperimentReport report;
  report.experiment = "success-rate";
  report.columns = {"ratio", "m", "trials", "success_rate", "mean_relative_error"};
  report.config_hash = hash_hex(to_json(spec));
  report.meta["spec"] = to_json(spec);
  nlohmann::json sweep_meta = nlohmann::json::array();
  for (std::size_t s = 0; s < spec.ratios.size(); ++s) {
    const Index m = static_cast<Index>(std::llround(spec.ratios[s] * static_cast<double>(spec.n)));
    std::vector<detail::TrialOutcome> trials(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, spec.threads, [&](Index j) {
      const std::uint64_t seed = rng::derive_stream(spec.master_seed, "success-rate", s,
                                                    static_cast<std::uint64_t>(j));
      trials[static_cast<std::size_t>(j)] = detail::run_trial<Scalar>(
          spec.kind, spec.n, spec.kind == ModelKind::Cdp ? m / spec.n : m, 0.0, false, seed,
          spec.run, spec.success_threshold);
    });
    double successes = 0.0, err_sum = 0.0;
    for (const auto& t : trials) {
      successes += t.success ? 1.0 : 0.0;
      err_sum += t.relative_error;
    }
    report.rows.push_back({spec.ratios[s], static_cast<double>(m),
                           static_cast<double>(spec.trials), successes / spec.trials,
                           err_sum / spec.trials});
    sweep_meta.push_back({{"ratio", spec.ratios[s]}, {"trials", detail::trials_to_json(trials)}});
  }
  report.meta["sweep"] = sweep_meta;
  return report;
}

// ---------------------------------------------------------------------------
// NMSE vs SNR

struct NmseVsSnrSpec {
  ModelKind kind = ModelKind::RealGaussian;
  Index n = 200;
  std::vector<double> snrs_db;        // +inf = noiseless sentinel
  std::vector<double> ratios = {3, 4, 5};
  int trials = 100;
  std::uint64_t master_seed = 1;
  RunConfig run = run_defaults(ModelKind::RealGaussian);
  double success_threshold = 1e-5;
  int threads = 1;
};

inline nlohmann::json to_json(const NmseVsSnrSpec& s) {
  nlohmann::json snrs = nlohmann::json::array();
  for (double v : s.snrs_db) snrs.push_back(std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v));
  return {{"experiment", "nmse-vs-snr"}, {"model", to_string(s.kind)},
          {"n", s.n},                    {"snrs_db", snrs},
          {"ratios", s.ratios},          {"trials", s.trials},
          {"master_seed", s.master_seed},{"run", to_json(s.run)},
          {"success_threshold", s.success_threshold}};
}

template <class Scalar = double>
ExperimentReport run_nmse_vs_snr(const NmseVsSnrSpec& spec) {
  if (spec.trials < 1 || spec.snrs_db.empty() || spec.ratios.empty())
    throw std::invalid_argument("run_nmse_vs_snr: need trials >= 1 and nonempty sweep lists");
  ExperimentReport report;
  report.experiment = "nmse-vs-snr";
  report.columns = {"ratio", "m", "snr_db", "trials", "mean_nmse"};
  report.config_hash = hash_hex(to_json(spec));
  report.meta["spec"] = to_json(spec);
  nlohmann::json sweep_meta = nlohmann::json::array();
  std::size_t sweep_index = 0;
  for (double ratio : spec.ratios) {
    const Index m = static_cast<Index>(std::llround(ratio * static_cast<double>(spec.n)));
    for (double snr : spec.snrs_db) {
      std::vector<detail::TrialOutcome> trials(static_cast<std::size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](Index j) {
        const std::uint64_t seed = rng::derive_stream(spec.master_seed, "nmse-vs-snr", sweep_index,
                                                      static_cast<std::uint64_t>(j));
        trials[static_cast<std::size_t>(j)] = detail::run_trial<Scalar>(
            spec.kind, spec.n, m, snr, /*sigma_is_snr=*/true, seed, spec.run,
            spec.success_threshold);
      });
      double nmse_sum = 0.0;
      for (const auto& t : trials) nmse_sum += t.nmse;
      report.rows.push_back({ratio, static_cast<double>(m),
                             std::isinf(snr) ? -1.0 : snr, static_cast<double>(spec.trials),
                             nmse_sum / spec.trials});
      sweep_meta.push_back({{"ratio", ratio},
                            {"snr_db", std::isinf(snr) ? nlohmann::json("inf") : nlohmann::json(snr)},
                            {"trials", detail::trials_to_json(trials)}});
      ++sweep_index;
    }
  }
  report.meta["sweep"] = sweep_meta;
  return report;
}

// ---------------------------------------------------------------------------
// Initialization quality

struct InitVariant {
  std::string label;
  InitConfig config;
};

// gamma = 0.5 default, the unweighted gamma = 0 baseline, and the full-set
// gamma = 2 spectral special case.
inline std::vector<InitVariant> default_init_variants(const InitConfig& base) {
  InitConfig weighted = base;
  weighted.gamma = 0.5;
  InitConfig unweighted = base;
  unweighted.gamma = 0.0;
  InitConfig spectral = base;
  spectral.gamma = 2.0;
  spectral.subset_fraction = 1.0;
  return {{"gamma0.5", weighted}, {"gamma0", unweighted}, {"spectral", spectral}};
}

struct InitQualitySpec {
  ModelKind kind = ModelKind::RealGaussian;
  Index n = 500;
  std::vector<double> ratios;           // m/n values
  std::vector<InitVariant> variants;    // empty = default_init_variants(base)
  InitConfig base;
  int trials = 100;
  std::uint64_t master_seed = 1;
  int threads = 1;
};

inline nlohmann::json to_json(const InitQualitySpec& s) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : s.variants) variants.push_back({{"label", v.label}, {"config", to_json(v.config)}});
  return {{"experiment", "init-quality"}, {"model", to_string(s.kind)},
          {"n", s.n},                     {"ratios", s.ratios},
          {"variants", variants},         {"base", to_json(s.base)},
          {"trials", s.trials},           {"master_seed", s.master_seed}};
}

// Mean relative init error per (ratio, variant); all variants see the same
// instances (matched seeds) so differences are paired.
template <class Scalar = double>
ExperimentReport run_init_quality(InitQualitySpec spec) {
  if (spec.variants.empty()) spec.variants = default_init_variants(spec.base);
  if (spec.trials < 1 || spec.ratios.empty())
    throw std::invalid_argument("run_init_quality: need trials >= 1 and a nonempty ratio list");
  ExperimentReport report;
  report.experiment = "init-quality";
  report.columns = {"ratio", "m", "variant", "gamma", "subset_fraction", "trials",
                    "mean_relative_error"};
  report.config_hash = hash_hex(to_json(spec));
  report.meta["spec"] = to_json(spec);
  nlohmann::json sweep_meta = nlohmann::json::array();
  for (std::size_t s = 0; s < spec.ratios.size(); ++s) {
    const Index m = static_cast<Index>(std::llround(spec.ratios[s] * static_cast<double>(spec.n)));
    // errors[v][j]
    std::vector<std::vector<double>> errors(spec.variants.size(),
                                            std::vector<double>(static_cast<std::size_t>(spec.trials)));
    parallel_for(spec.trials, spec.threads, [&](Index j) {
      const std::uint64_t seed = rng::derive_stream(spec.master_seed, "init-quality", s,
                                                    static_cast<std::uint64_t>(j));
      const auto model =
          sample_model<Scalar>(spec.kind, spec.n, m, rng::derive_stream(seed, "A"));
      const Vec<Scalar> x = random_signal<Scalar>(spec.n, rng::derive_stream(seed, "x"));
      const auto inst = measure(model, x, 0.0, seed);
      const double x_norm = x.norm();
      for (std::size_t v = 0; v < spec.variants.size(); ++v) {
        const auto init = initialize(inst, spec.variants[v].config);
        errors[v][static_cast<std::size_t>(j)] = distance(init.z0, x) / x_norm;
      }
    });
    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      double sum = 0.0;
      for (double e : errors[v]) sum += e;
      report.rows.push_back({spec.ratios[s], static_cast<double>(m), static_cast<double>(v),
                             spec.variants[v].config.gamma,
                             spec.variants[v].config.subset_fraction,
                             static_cast<double>(spec.trials), sum / spec.trials});
      sweep_meta.push_back({{"ratio", spec.ratios[s]},
                            {"variant", spec.variants[v].label},
                            {"errors", errors[v]}});
    }
  }
  report.meta["sweep"] = sweep_meta;
  return report;
}

// ---------------------------------------------------------------------------
// Loss histogram at the information-theoretic limit m = 2n-1

struct LimitHistogramSpec {
  Index n = 500;
  int trials = 100;
  std::uint64_t master_seed = 1;
  RunConfig run = run_defaults(ModelKind::RealGaussian);
  double success_threshold = 1e-5;
  int threads = 1;
};

inline nlohmann::json to_json(const LimitHistogramSpec& s) {
  return {{"experiment", "limit-histogram"}, {"n", s.n},
          {"trials", s.trials},              {"master_seed", s.master_seed},
          {"run", to_json(s.run)},           {"success_threshold", s.success_threshold}};
}

inline ExperimentReport run_limit_histogram(const LimitHistogramSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("run_limit_histogram: trials must be >= 1");
  const Index m = 2 * spec.n - 1;
  ExperimentReport report;
  report.experiment = "limit-histogram";
  report.columns = {"neg_log10_loss_bin", "count"};
  report.config_hash = hash_hex(to_json(spec));
  report.meta["spec"] = to_json(spec);
  std::vector<detail::TrialOutcome> trials(static_cast<std::size_t>(spec.trials));
  parallel_for(spec.trials, spec.threads, [&](Index j) {
    const std::uint64_t seed =
        rng::derive_stream(spec.master_seed, "limit-histogram", 0, static_cast<std::uint64_t>(j));
    trials[static_cast<std::size_t>(j)] = detail::run_trial<double>(
        ModelKind::RealGaussian, spec.n, m, 0.0, false, seed, spec.run, spec.success_threshold);
  });
  constexpr int kMaxBin = 40;  // loss of exactly 0 lands in the last bin
  std::vector<double> counts(kMaxBin + 1, 0.0);
  std::vector<double> losses;
  double successes = 0.0;
  for (const auto& t : trials) {
    const double neg_log = t.final_loss > 0.0 ? -std::log10(t.final_loss)
                                              : static_cast<double>(kMaxBin);
    const int bin = std::clamp(static_cast<int>(std::floor(neg_log)), 0, kMaxBin);
    counts[static_cast<std::size_t>(bin)] += 1.0;
    losses.push_back(t.final_loss);
    successes += t.success ? 1.0 : 0.0;
  }
  for (int b = 0; b <= kMaxBin; ++b)
    report.rows.push_back({static_cast<double>(b), counts[static_cast<std::size_t>(b)]});
  std::vector<double> sorted = losses;
  std::sort(sorted.begin(), sorted.end());
  report.meta["m"] = m;
  report.meta["success_rate"] = successes / spec.trials;
  report.meta["median_loss"] = sorted[sorted.size() / 2];
  report.meta["trials"] = detail::trials_to_json(trials);
  return report;
}

// ---------------------------------------------------------------------------
// CDP recovery

struct CdpRecoverySpec {
  std::vector<VecXd> bands;  // real image bands, each vectorized; empty = random complex signal
  Index n = 256;             // signal length when bands is empty
  Index mask_count = 4;
  std::uint64_t master_seed = 1;
  InitConfig init = [] { InitConfig c; c.power_iters = 100; return c; }();
  SolverConfig solver = [] {
    SolverConfig c = SolverConfig::for_model(ModelKind::Cdp);
    c.max_iters = 100;
    return c;
  }();
  double success_threshold = 1e-5;
  int threads = 1;
};

inline nlohmann::json to_json(const CdpRecoverySpec& s) {
  return {{"experiment", "cdp-recovery"},
          {"bands", s.bands.size()},
          {"n", s.bands.empty() ? s.n : static_cast<Index>(s.bands.front().size())},
          {"mask_count", s.mask_count},
          {"master_seed", s.master_seed},
          {"init", to_json(s.init)},
          {"solver", to_json(s.solver)},
          {"success_threshold", s.success_threshold}};
}

struct CdpRecoveryResult {
  ExperimentReport report;
  std::vector<VecXd> recovered_bands;  // phase-aligned real parts, one per input band
};

// Each band is recovered independently from |F D^(k) x| with its own masks.
inline CdpRecoveryResult run_cdp_recovery(const CdpRecoverySpec& spec) {
  if (spec.mask_count < 1) throw std::invalid_argument("run_cdp_recovery: mask_count must be >= 1");
  CdpRecoveryResult result;
  result.report.experiment = "cdp-recovery";
  result.report.columns = {"band", "n", "mask_count", "relative_error", "residual", "success"};
  result.report.config_hash = hash_hex(to_json(spec));
  result.report.meta["spec"] = to_json(spec);

  const bool random_signal_mode = spec.bands.empty();
  const std::size_t band_count = random_signal_mode ? 1 : spec.bands.size();
  for (std::size_t b = 0; b < band_count; ++b) {
    const std::uint64_t seed = rng::derive_stream(spec.master_seed, "cdp-recovery", b, 0);
    VecXcd x;
    if (random_signal_mode) {
      x = random_signal<cxd>(spec.n, rng::derive_stream(seed, "x"));
    } else {
      x = spec.bands[b].cast<cxd>();
    }
    const Index n = x.size();
    if (n < 1) throw std::invalid_argument("run_cdp_recovery: empty band");
    const auto model = sample_cdp(n, spec.mask_count, rng::derive_stream(seed, "A"));
    const auto inst = measure(model, x, 0.0, seed);
    const auto init = initialize(inst, spec.init);
    const auto sol = solve(inst, init.z0, spec.solver);
    const auto eval = evaluate(inst, sol.z_final, spec.success_threshold);
    result.report.rows.push_back({static_cast<double>(b), static_cast<double>(n),
                                  static_cast<double>(spec.mask_count), eval.relative_error,
                                  eval.residual, eval.success ? 1.0 : 0.0});
    // Undo the global phase against the known truth, then keep the real part.
    const cxd overlap = x.dot(sol.z_final);
    const cxd rotation = std::abs(overlap) == 0.0 ? cxd(1, 0) : overlap / std::abs(overlap);
    result.recovered_bands.push_back((sol.z_final / rotation).real());
  }
  return result;
}

}  // namespace raf
