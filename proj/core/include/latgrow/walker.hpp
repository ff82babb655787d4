#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "latgrow/domain.hpp"
#include "latgrow/rng.hpp"
#include "latgrow/site.hpp"

namespace latgrow {

/// One record of the alternating stopping-time sequence: sigma fires against
/// the boundary snapshot frozen at eta, a_n tells whether the walk hit the
/// origin during [eta, sigma). sigma = -1 while the record is still open.
struct StoppingRecord {
  long n = 0;
  long eta = 0;
  long sigma = -1;
  bool a_n = false;
  Site start;         // X_eta
  long snapshot_tag = -1;  // model-defined handle to the domain at eta
};

struct StoppingLog {
  std::vector<StoppingRecord> records;
};

using BoundaryPredicate = std::function<bool(const Site&)>;

/// Interface every interaction model implements so the common driver can
/// step it, keep recurrence statistics and maintain the stopping log.
/// advance() performs exactly one time step (a stay-put step counts).
class WalkModel {
 public:
  virtual ~WalkModel() = default;

  virtual int dim() const = 0;
  virtual void advance(RngBundle& rng) = 0;
  virtual const Site& position() const = 0;

  /// Live boundary membership at the current time.
  virtual bool on_live_boundary(const Site& z) const = 0;
  /// A predicate for the boundary as it is right now (the sigma_n snapshot).
  virtual BoundaryPredicate freeze_boundary() const = 0;
  /// Opaque handle identifying the current domain (shell index, frontier
  /// position, growth-log length...); feeds the S-criterion estimator.
  virtual long snapshot_tag() const { return -1; }

  virtual long domain_sites() const { return -1; }
  virtual long domain_edges() const { return -1; }

  /// Open directions at z, for BFS distance queries; 0 if unknown.
  virtual uint8_t open_dirs(const Site&) const { return 0; }

  /// d^{G_t}(0, position). Default runs a capped BFS through open_dirs;
  /// models with implicit full-ball domains override with the exact value.
  virtual long dist_to_origin(long cap) const;
};

/// SRW on the full lattice Z^d (every edge open). Also the shared-stream
/// comparison baseline for coupling tests.
class PlainSrwModel : public WalkModel {
 public:
  explicit PlainSrwModel(int d, Site start = Site()) : d_(d), pos_(start) {}

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override {
    pos_ = neighbor(pos_, static_cast<int>(rng.main.below(static_cast<uint32_t>(2 * d_))));
  }
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site&) const override { return false; }
  BoundaryPredicate freeze_boundary() const override {
    return [](const Site&) { return false; };
  }
  uint8_t open_dirs(const Site&) const override {
    return static_cast<uint8_t>((1u << (2 * d_)) - 1);
  }
  long dist_to_origin(long) const override { return l1_norm(pos_, d_); }

 private:
  int d_;
  Site pos_;
};

struct CheckpointRow {
  long t = 0;
  long n0 = 0;           // visits to the origin in [0, t]
  long last_return = 0;  // latest s <= t with X_s = 0
  long dist = -1;        // d^{G_t}(0, X_t), -1 if uncomputed
  long sites = -1;
  long edges = -1;
};

struct RunOptions {
  long horizon = 0;
  long r_max = 1'000'000;        // l1 truncation radius (flagged, not fatal)
  bool track_stopping_log = false;
  bool record_trajectory = false;
  std::vector<long> checkpoints;  // empty: powers of two plus the horizon
  long dist_cap = 4096;           // BFS depth cap; -1 skips dist entirely
};

struct RunResult {
  std::vector<CheckpointRow> checkpoints;
  long n0_final = 0;
  long last_return = 0;
  long steps_done = 0;
  bool truncated = false;
  StoppingLog stopping_log;
  std::vector<Site> trajectory;                  // only if requested
  std::vector<BoundaryPredicate> frozen;         // per stopping record, if tracked
};

/// Default dyadic checkpoint schedule: 0, 1, 2, 4, ..., horizon.
std::vector<long> dyadic_checkpoints(long horizon);

/// Drives a model for `horizon` steps: per-step origin statistics, optional
/// stopping-time log (frozen-boundary semantics for sigma), checkpoint rows,
/// truncation at r_max. Deterministic given (model state, rng keys).
RunResult run(WalkModel& model, const RunOptions& opts, RngBundle& rng);

/// BFS graph distance between two sites through an open_dirs oracle,
/// capped at `cap` levels; -1 if not reached.
long graph_distance(const std::function<uint8_t(const Site&)>& open_dirs, int d,
                    const Site& from, const Site& to, long cap);

/// N0 growth curve and last return time recomputed offline from a stored
/// trajectory (the online statistics' independent oracle).
struct RecurrenceCurve {
  std::vector<std::pair<long, long>> n0_at;  // (t, N0(t))
  long last_return = 0;
};
RecurrenceCurve recurrence_stats(std::span<const Site> trajectory,
                                 std::span<const long> checkpoints);

}  // namespace latgrow
