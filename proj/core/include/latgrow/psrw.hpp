#pragma once

#include <unordered_set>
#include <vector>

#include "latgrow/domain.hpp"
#include "latgrow/walker.hpp"

namespace latgrow {

/// Per-step probe counts m(t) and their running average.
struct ProbeBudget {
  std::vector<int> m;
  std::vector<long> cumsum;

  void record(int count) {
    m.push_back(count);
    cumsum.push_back((cumsum.empty() ? 0 : cumsum.back()) + count);
  }
  long total() const { return cumsum.empty() ? 0 : cumsum.back(); }
  /// m_bar over the first t steps (t in [1, size]).
  double mbar(size_t t) const {
    return static_cast<double>(cumsum[t - 1]) / static_cast<double>(t);
  }
};

struct BudgetReport {
  std::vector<std::pair<long, double>> mbar_at;  // (t, mbar_t), t >= 1
  double trailing_mbar = 0.0;  // average over the trailing half of the run
};

BudgetReport budget_report(const ProbeBudget& budget,
                           const std::vector<long>& checkpoints);

enum class LatticeClass { Off, Lattice, Junction };

/// Stretched-lattice membership: a site is on L when some coordinate is a
/// multiple of L, and a junction when all are. Throws for L < 2.
LatticeClass stretched_membership(const Site& z, int L, int d);

enum class GuidedVariant { FullD3, BiasedD2 };

/// Guided PSRW on the stretched lattice: first visits probe open the site's
/// closed adjacent L-edges (all of them, or only non-left in the d=2 biased
/// variant), then a uniform step along open L-edges. Probes are
/// deterministic, so under a shared stream the FullD3 variant reproduces
/// SRW on the fixed graph L step for step.
class GuidedPsrwModel : public WalkModel {
 public:
  GuidedPsrwModel(int d, int L, GuidedVariant variant, Site start = Site());

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site&) const override { return false; }
  BoundaryPredicate freeze_boundary() const override {
    return [](const Site&) { return false; };
  }
  long domain_sites() const override {
    return static_cast<long>(visited_.size());
  }
  uint8_t open_dirs(const Site& z) const override;

  const ProbeBudget& budget() const { return budget_; }
  bool edge_open(const Edge& e) const { return open_.count(e) != 0; }

 private:
  void probe_at(const Site& z);

  int d_, L_;
  GuidedVariant variant_;
  Site pos_;
  std::unordered_set<Site, SiteHash> visited_;
  std::unordered_set<Edge, EdgeHash> open_;
  ProbeBudget budget_;
  int pending_m_ = 0;  // probes spent at the pending arrival
};

/// SRW on the fixed stretched-lattice graph (every L-edge open): the law
/// the guided strategy must reproduce.
class FixedLatticeSrwModel : public WalkModel {
 public:
  FixedLatticeSrwModel(int d, int L, Site start = Site());

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site&) const override { return false; }
  BoundaryPredicate freeze_boundary() const override {
    return [](const Site&) { return false; };
  }
  uint8_t open_dirs(const Site& z) const override;

 private:
  int d_, L_;
  Site pos_;
};

/// Line strategy: the domain is the symmetric interval on the first axis,
/// extended by M edges on each side every step (2M probes), and the walk is
/// 1-d SRW inside it.
class LinePsrwModel : public WalkModel {
 public:
  LinePsrwModel(int d, long M);

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site&) const override { return false; }
  BoundaryPredicate freeze_boundary() const override {
    return [](const Site&) { return false; };
  }
  long domain_sites() const override { return 2 * half_ + 1; }
  long dist_to_origin(long) const override { return std::abs(pos_[0]); }

  const ProbeBudget& budget() const { return budget_; }
  long halfwidth() const { return half_; }

 private:
  int d_;
  long M_, half_ = 0;
  Site pos_;
  ProbeBudget budget_;
};

/// One unguided probe: an auxiliary SRW on the full lattice from pos until
/// it first leaves `dom`; returns the exit site. Walks exceeding `cap`
/// steps retry with fresh randomness; repeated exhaustion is fatal.
Site unguided_probe(const std::unordered_set<Site, SiteHash>& dom, int d,
                    const Site& pos, RngStream& rng, long cap = 1'000'000,
                    int max_retries = 64);

/// Coupon strategy: at each first visit to z, unguided probes are drawn
/// until B(z,1) is inside the domain; the main walk is plain SRW on Z^d
/// (exactly, under a shared main stream).
class CouponPsrwModel : public WalkModel {
 public:
  CouponPsrwModel(int d, long probe_cap = 1'000'000);

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site&) const override { return false; }
  BoundaryPredicate freeze_boundary() const override {
    return [](const Site&) { return false; };
  }
  long domain_sites() const override { return static_cast<long>(dom_.size()); }
  long dist_to_origin(long) const override { return l1_norm(pos_, d_); }

  const ProbeBudget& budget() const { return budget_; }
  const std::vector<int>& probes_per_first_visit() const { return first_visit_m_; }
  const std::unordered_set<Site, SiteHash>& domain() const { return dom_; }
  long total_probes() const { return budget_.total(); }

 private:
  int fill_ball(const Site& z, RngBundle& rng);

  int d_;
  long cap_;
  Site pos_;
  std::unordered_set<Site, SiteHash> dom_;
  std::unordered_set<Site, SiteHash> visited_;
  ProbeBudget budget_;
  std::vector<int> first_visit_m_;
  int pending_m_ = 0;
};

}  // namespace latgrow
