#pragma once

// Batches of trials, failure-probability estimates against the bounds, and
// CSV/JSON output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ncdelay/bounds.hpp"
#include "ncdelay/config.hpp"
#include "ncdelay/simnet.hpp"
#include "ncdelay/stats.hpp"

namespace ncdelay::harness {

enum class OutputFormat { csv, json };
OutputFormat parse_format(std::string_view s);

struct ExperimentConfig {
  sim::NetworkConfig network;
  std::vector<bounds::Regime> regimes;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  double epsilon = 0.05;
  double confidence = 0.95;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;

  // Precoded networks are rebuilt from these at every grid point.
  std::size_t precode_alpha = 0;
  std::optional<codec::PrecodeConfig> precode;

  // Bound inputs that the network does not determine.
  double gamma_c = 0.2;
  bounds::Growth f_k = bounds::Growth::log2_k;
  double implied_constant = 1.0;

  // Grid axes; an empty axis keeps the network's own value.
  std::vector<std::size_t> sweep_k;
  std::vector<std::size_t> sweep_L;
  std::vector<std::size_t> sweep_q;

  /// Throws config::ConfigError naming the offending field.
  void validate() const;
  /// Canonical text of every result-affecting setting (seed and output excluded).
  std::string canonical() const;
  /// FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;
};

/// Builds and validates an experiment from parsed configuration text.
ExperimentConfig experiment_from_config(const config::ConfigMap& m);

/// Every key experiment_from_config understands.
const std::set<std::string>& known_keys();

struct SummaryRow {
  std::string regime;
  std::size_t k = 0;
  std::size_t L = 0;
  std::size_t q = 0;
  std::size_t alpha = 0;
  double epsilon = 0;
  double bound = 0;
  double mean_delay = 0;
  double p50 = 0;
  double p95 = 0;
  double fail_frac = 0;
  double fail_ci_lo = 0;
  double fail_ci_hi = 0;
  std::size_t censored = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct ExperimentSummary {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<SummaryRow> rows;
  /// Violated bound side conditions, one line each, prefixed by regime.
  std::vector<std::string> warnings;

  friend bool operator==(const ExperimentSummary&, const ExperimentSummary&) = default;
};

/// Worker threads for trial batches: NCDELAY_WORKERS if set, else the
/// hardware concurrency. Never affects results.
std::size_t worker_count();

/// Runs trials 0..n-1 of each network with seeds trial_seed(master_seed, i),
/// spreading (network, trial) pairs over `workers` threads (0 = worker_count()).
/// Output is indexed [network][trial].
std::vector<std::vector<sim::TrialResult>> run_batches(std::span<const sim::NetworkConfig> networks,
                                                       std::size_t trials, std::uint64_t master_seed,
                                                       std::size_t workers = 0);

std::vector<sim::TrialResult> run_trials(const sim::NetworkConfig& network, std::size_t trials,
                                         std::uint64_t master_seed, std::size_t workers = 0);

/// Share of samples strictly above threshold, with a two-sided Wilson interval.
/// Throws std::invalid_argument on an empty sample.
stats::Proportion failure_fraction(std::span<const double> samples, double threshold, double confidence = 0.95);

/// Bound query for `regime` on `network`, with p (and gamma_e) taken from
/// the equivalent per-link parameters.
bounds::BoundQuery bound_query(const ExperimentConfig& cfg, const sim::NetworkConfig& network, bounds::Regime regime);

/// Summary rows for one network's trials, one per configured regime.
std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const sim::NetworkConfig& network,
                                  std::span<const sim::TrialResult> trials, std::vector<std::string>* warnings = nullptr);

/// Networks of the sweep grid in k, L, q order; just the base network when
/// no sweep axis is set.
std::vector<sim::NetworkConfig> grid(const ExperimentConfig& cfg);

/// Runs every grid point and summarizes it.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::size_t workers = 0);

std::string to_csv(const ExperimentSummary& s);
std::string to_json(const ExperimentSummary& s);
/// Throws std::invalid_argument on malformed input.
ExperimentSummary summary_from_json(std::string_view text);

/// Writes the summary; throws std::runtime_error naming the path on failure.
void emit(const ExperimentSummary& s, OutputFormat format, const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace ncdelay::harness
