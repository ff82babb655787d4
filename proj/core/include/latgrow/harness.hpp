#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "latgrow/criterion.hpp"
#include "latgrow/psrw.hpp"
#include "latgrow/walker.hpp"

namespace latgrow {

/// Raised for any malformed or out-of-range configuration; the CLI maps it
/// to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string model;  // plain | obt | pobt | fobt | robt | extended-drift |
                      // fobt-biased | egs | layered | psrw-guided |
                      // psrw-line | psrw-coupon
  int d = 2;
  long horizon = 1;
  long replicas = 1;
  uint64_t master_seed = 0;
  long r_max = 1'000'000;
  long dist_cap = 4096;
  bool track_stopping_log = false;
  double truncation_threshold = 1.0;  // allowed truncated fraction
  std::vector<long> checkpoints;      // empty: dyadic schedule
  nlohmann::json params;              // model-specific block
  std::string csv_path, jsonl_path, growth_log_path;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

Schedule parse_schedule(const nlohmann::json& j);

/// Builds the model for one replica. Streams that a model consumes at
/// construction time (layered-chain budgets) are derived from
/// (master_seed, replica) with their own labels.
std::unique_ptr<WalkModel> make_model(const ExperimentConfig& cfg,
                                      uint64_t replica);

struct ReplicaResult {
  long replica = 0;
  RunResult run;
  std::optional<BudgetReport> budget;  // PSRW strategies only
  double wall_ms = 0.0;                // in-memory only, never emitted
};

/// Executes all replicas (worker count from LATGROW_WORKERS, default the
/// hardware concurrency); results are ordered by replica index regardless
/// of scheduling.
std::vector<ReplicaResult> run_experiment(const ExperimentConfig& cfg);

struct Summary {
  std::vector<long> ts;
  std::vector<double> median_n0, median_dist;
  double n0_slope = 0.0;  // least squares of log N0 vs log t
  long truncated = 0;
};
Summary summarize(const std::vector<ReplicaResult>& results);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<std::pair<double, double>>& xy);

double median(std::vector<double> v);

struct SweepRow {
  std::map<std::string, nlohmann::json> cell;
  double median_n0 = 0.0;
  double median_last_return = 0.0;
  double median_trailing_mbar = -1.0;  // -1 when not a PSRW model
  long truncated = 0;
};

/// Cross-product over the grid (config-path -> list of values, paths like
/// "params.L"), one summary row per cell, shared master seed.
std::vector<SweepRow> sweep(const nlohmann::json& base_config,
                            const nlohmann::json& grid);

// Emission. All files start with a schema-version header line and contain
// no timestamps, so equal inputs produce byte-identical bytes.
void write_checkpoints_csv(const std::string& path,
                           const std::vector<ReplicaResult>& results);
void write_replicas_jsonl(const std::string& path,
                          const std::vector<ReplicaResult>& results);
void write_summary_csv(const std::string& path, const Summary& summary);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

/// Parses a checkpoints CSV back into (replica, row) records (round-trip
/// oracle for the emitter).
std::vector<std::pair<long, CheckpointRow>> read_checkpoints_csv(
    const std::string& path);

/// Fraction of truncated replicas; the CLI maps an excess over the
/// configured threshold to exit code 3.
double truncation_rate(const std::vector<ReplicaResult>& results);

}  // namespace latgrow
