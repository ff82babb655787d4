#include "latgrow/walker.hpp"

#include <deque>
#include <stdexcept>
#include <unordered_map>

namespace latgrow {

long WalkModel::dist_to_origin(long cap) const {
  return graph_distance([this](const Site& z) { return open_dirs(z); }, dim(),
                        Site(), position(), cap);
}

long graph_distance(const std::function<uint8_t(const Site&)>& open_dirs, int d,
                    const Site& from, const Site& to, long cap) {
  if (from == to) return 0;
  std::unordered_map<Site, long, SiteHash> dist;
  dist.emplace(from, 0);
  std::deque<Site> queue{from};
  while (!queue.empty()) {
    Site z = queue.front();
    queue.pop_front();
    long dz = dist[z];
    if (cap >= 0 && dz >= cap) continue;
    uint8_t mask = open_dirs(z);
    for (int dir = 0; dir < 2 * d; ++dir) {
      if (!((mask >> dir) & 1)) continue;
      Site n = neighbor(z, dir);
      if (n == to) return dz + 1;
      if (dist.emplace(n, dz + 1).second) queue.push_back(n);
    }
  }
  return -1;
}

std::vector<long> dyadic_checkpoints(long horizon) {
  std::vector<long> cps{0};
  for (long t = 1; t < horizon; t *= 2) cps.push_back(t);
  if (horizon > 0) cps.push_back(horizon);
  return cps;
}

namespace {

class StoppingTracker {
 public:
  StoppingTracker(RunResult& out, bool keep_frozen)
      : out_(out), keep_frozen_(keep_frozen) {}

  void observe(long t, const Site& pos, const WalkModel& model) {
    if (hitting_) {
      StoppingRecord& rec = out_.stopping_log.records.back();
      if (frozen_ && frozen_(pos)) {
        rec.sigma = t;
        hitting_ = false;
        // eta_{n+1} may coincide with sigma_n when the site has already
        // left the live boundary.
        try_open(t, pos, model);
      } else if (pos.is_origin()) {
        rec.a_n = true;
      }
    } else {
      try_open(t, pos, model);
    }
  }

 private:
  void try_open(long t, const Site& pos, const WalkModel& model) {
    if (model.on_live_boundary(pos)) return;
    StoppingRecord rec;
    rec.n = static_cast<long>(out_.stopping_log.records.size());
    rec.eta = t;
    rec.start = pos;
    rec.snapshot_tag = model.snapshot_tag();
    rec.a_n = pos.is_origin();
    frozen_ = model.freeze_boundary();
    if (keep_frozen_) out_.frozen.push_back(frozen_);
    out_.stopping_log.records.push_back(std::move(rec));
    hitting_ = true;
  }

  RunResult& out_;
  bool keep_frozen_;
  bool hitting_ = false;
  BoundaryPredicate frozen_;
};

}  // namespace

RunResult run(WalkModel& model, const RunOptions& opts, RngBundle& rng) {
  if (opts.horizon < 0) throw std::invalid_argument("run: horizon must be >= 0");
  RunResult res;
  std::vector<long> cps =
      opts.checkpoints.empty() ? dyadic_checkpoints(opts.horizon) : opts.checkpoints;
  size_t next_cp = 0;

  Site pos = model.position();
  res.n0_final = pos.is_origin() ? 1 : 0;
  res.last_return = 0;
  if (opts.record_trajectory && opts.horizon > 0) {
    res.trajectory.reserve(static_cast<size_t>(opts.horizon) + 1);
    res.trajectory.push_back(pos);
  }

  StoppingTracker tracker(res, opts.record_trajectory);
  if (opts.track_stopping_log && opts.horizon > 0) tracker.observe(0, pos, model);

  auto emit_checkpoint = [&](long t) {
    CheckpointRow row;
    row.t = t;
    row.n0 = res.n0_final;
    row.last_return = res.last_return;
    row.dist = (opts.dist_cap >= 0) ? model.dist_to_origin(opts.dist_cap) : -1;
    row.sites = model.domain_sites();
    row.edges = model.domain_edges();
    res.checkpoints.push_back(row);
  };

  for (long t = 0; t < opts.horizon; ++t) {
    while (next_cp < cps.size() && cps[next_cp] == t) {
      emit_checkpoint(t);
      ++next_cp;
    }
    model.advance(rng);
    ++res.steps_done;
    pos = model.position();
    if (opts.record_trajectory) res.trajectory.push_back(pos);
    if (pos.is_origin()) {
      ++res.n0_final;
      res.last_return = t + 1;
    }
    if (opts.track_stopping_log) tracker.observe(t + 1, pos, model);
    if (l1_norm(pos, model.dim()) >= opts.r_max) {
      res.truncated = true;
      break;
    }
  }
  while (next_cp < cps.size() && cps[next_cp] <= res.steps_done) {
    emit_checkpoint(cps[next_cp]);
    ++next_cp;
  }
  return res;
}

RecurrenceCurve recurrence_stats(std::span<const Site> trajectory,
                                 std::span<const long> checkpoints) {
  RecurrenceCurve out;
  long n0 = 0;
  size_t next = 0;
  for (size_t t = 0; t < trajectory.size(); ++t) {
    if (trajectory[t].is_origin()) {
      ++n0;
      out.last_return = static_cast<long>(t);
    }
    while (next < checkpoints.size() &&
           static_cast<size_t>(checkpoints[next]) == t) {
      out.n0_at.emplace_back(static_cast<long>(t), n0);
      ++next;
    }
  }
  while (next < checkpoints.size()) {
    out.n0_at.emplace_back(checkpoints[next], n0);
    ++next;
  }
  return out;
}

}  // namespace latgrow
