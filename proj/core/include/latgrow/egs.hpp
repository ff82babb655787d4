#pragma once

#include <functional>
#include <vector>

#include "latgrow/criterion.hpp"
#include "latgrow/domain.hpp"
#include "latgrow/walker.hpp"

namespace latgrow {

/// Expanding glassy spheres: SRW confined to the ball B(0, ck), which grows
/// to the (k+1)-ball after the walk's N(k)-th visit to the current shell
/// boundary. The ball is implicit (membership test), so shells of radius
/// in the hundreds cost nothing to hold.
class EgsModel : public WalkModel {
 public:
  EgsModel(int d, double c, Schedule sched, Metric metric, long k0 = 1,
           Site start = Site());

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site& z) const override {
    return on_shell_boundary(z, k_);
  }
  BoundaryPredicate freeze_boundary() const override;
  long snapshot_tag() const override { return k_; }
  long domain_sites() const override;
  long domain_edges() const override;
  uint8_t open_dirs(const Site& z) const override;
  long dist_to_origin(long) const override { return l1_norm(pos_, d_); }

  long shell() const { return k_; }
  long hits() const { return hits_; }
  const std::vector<std::pair<long, long>>& tau_log() const { return tau_; }

  bool in_shell(const Site& z, long k) const;
  bool on_shell_boundary(const Site& z, long k) const;

 private:
  int d_;
  double c_;
  Schedule sched_;
  Metric metric_;
  long k_;
  long hits_ = 0;
  long t_ = 0;
  Site pos_;
  std::vector<std::pair<long, long>> tau_;  // (k, tau_k), tau at k0 is 0
};

/// Site/edge counts of the metric ball of radius r around 0, by column
/// slicing (the balls are orthogonally convex, so each axis-column is one
/// contiguous run).
long ball_site_count(double r, Metric metric, int d);
long ball_edge_count(double r, Metric metric, int d);

/// The layered birth-death chain on Z_+: up probability p_up(k) at layer k
/// (holding steps removed), reflecting at 0, and the edge (k, k+1) opening
/// only after Binomial(N(k), q(k)) down-steps from the frontier k. Zero
/// budgets cascade.
class LayeredChainModel : public WalkModel {
 public:
  LayeredChainModel(std::function<double(long)> p_up,
                    std::function<double(long)> q, Schedule sched,
                    RngStream budget_rng, long frontier0 = 1);

  int dim() const override { return 1; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site& z) const override {
    return static_cast<long>(z[0]) == frontier_;
  }
  BoundaryPredicate freeze_boundary() const override {
    long f = frontier_;
    return [f](const Site& z) { return static_cast<long>(z[0]) == f; };
  }
  long snapshot_tag() const override { return frontier_; }
  long domain_sites() const override { return frontier_ + 1; }
  long domain_edges() const override { return frontier_; }
  uint8_t open_dirs(const Site& z) const override;
  long dist_to_origin(long) const override { return pos_[0]; }

  long frontier() const { return frontier_; }
  const std::function<double(long)>& p_up() const { return p_up_; }

 private:
  void open_next();

  std::function<double(long)> p_up_, q_;
  Schedule sched_;
  RngStream budget_rng_;
  long frontier_;
  long budget_;  // down-steps left before the frontier edge opens
  Site pos_;
};

}  // namespace latgrow
