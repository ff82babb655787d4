#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "latgrow/domain.hpp"
#include "latgrow/walker.hpp"

namespace latgrow {

// ---------------------------------------------------------------------------
// Open-by-touch family

enum class ObtKind {
  None,  // no domain update (plain extended-SRW host)
  Obt,   // open all 2d edges on every boundary visit
  Pobt,  // open a subset with probability >= epsilon
  Fobt,  // open all 2d edges on first visits only
  Robt,  // open a bounded-cardinality set of nearby edges
};

enum class PobtRule { All, OneUniform };

struct ObtParams {
  ObtKind kind = ObtKind::Obt;
  double epsilon = 1.0;            // POBT: per-visit opening probability
  PobtRule rule = PobtRule::All;   // POBT: which closed edges open when firing
  int robt_bound = 1;              // ROBT: |A_t| upper bound
  long robt_radius = 1;            // ROBT: edges must touch B(Y_t, radius)
};

/// One open-by-touch domain update induced by the walker sitting at pos.
/// No-op unless pos is on the boundary. The edges take effect immediately
/// (before the next move).
void obt_update(GrowingDomain& dom, const Site& pos, long t);

/// POBT update: with probability epsilon opens a nonempty subset of pos's
/// closed edges chosen by `rule`. Returns whether anything opened.
/// Throws for epsilon <= 0.
bool pobt_update(GrowingDomain& dom, const Site& pos, long t, double epsilon,
                 PobtRule rule, RngStream& rng);

/// ROBT update: opens up to `bound` closed edges chosen uniformly among the
/// edges incident to sites within l1-distance `radius` of pos.
void robt_update(GrowingDomain& dom, const Site& pos, long t, int bound,
                 long radius, RngStream& rng);

// ---------------------------------------------------------------------------
// Boundary move policies (extended SRW)

enum class BoundaryPolicyKind { Uniform, DriftToOrigin, Scripted };

/// How the walker moves when it arrived on a boundary site. Uniform is the
/// ordinary SRW step among open neighbors. DriftToOrigin realizes the
/// conditional mean E[dY | F] = -delta * Y / |Y|_1 over the open axis
/// neighbors. Scripted jumps to script(pos, t), which must lie in
/// G_t intersect B(pos, radius(pos)); the radius is clamped to
/// [1, c * |pos|_1] with c < 1.
struct BoundaryPolicy {
  BoundaryPolicyKind kind = BoundaryPolicyKind::Uniform;
  double delta = 0.0;
  double c = 0.5;
  std::function<long(const Site&)> radius;           // default: r = 1
  std::function<Site(const Site&, long)> script;     // Scripted only
};

/// Tilted axis-step distribution with the drift-to-origin mean, restricted
/// to the available directions (bitmask). Returns per-direction
/// probabilities (size 2d); throws if no direction is available. The target
/// mean is shrunk toward zero when the constraint is infeasible.
std::vector<double> drift_step_distribution(const Site& pos, int d, double delta,
                                            uint8_t avail);

// ---------------------------------------------------------------------------
// The walking model: domain update (per kind) fires on arrival at a boundary
// site and takes effect before the departure move; the move is the boundary
// policy's if the site was on the boundary at arrival, otherwise a uniform
// step among open neighbors.

class ObtModel : public WalkModel {
 public:
  ObtModel(GrowingDomain dom, ObtParams params, int d, Site start = Site(),
           BoundaryPolicy policy = {});

  int dim() const override { return d_; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site& z) const override {
    return dom_.on_boundary(z);
  }
  BoundaryPredicate freeze_boundary() const override;
  long snapshot_tag() const override {
    return static_cast<long>(dom_.growth_log().size());
  }
  long domain_sites() const override { return static_cast<long>(dom_.site_count()); }
  long domain_edges() const override { return static_cast<long>(dom_.edge_count()); }
  uint8_t open_dirs(const Site& z) const override { return dom_.open_dirs(z); }

  const GrowingDomain& domain() const { return dom_; }
  GrowingDomain& domain() { return dom_; }
  long time() const { return t_; }

 private:
  void boundary_move(RngBundle& rng);

  GrowingDomain dom_;
  ObtParams params_;
  int d_;
  Site pos_;
  BoundaryPolicy policy_;
  long t_ = 0;
  std::unordered_set<Site, SiteHash> visited_;  // FOBT first-visit set
};

// ---------------------------------------------------------------------------
// FOBT-biased walk (d = 2): on first visit opens the right/up/down edges of
// the site (union with the Bernoulli initial field D0), then stays put for
// one step when anything actually opened.

class FobtBiasedModel : public WalkModel {
 public:
  FobtBiasedModel(BernoulliField d0, Site start = Site());

  int dim() const override { return 2; }
  void advance(RngBundle& rng) override;
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site& z) const override {
    return open_count(z) < 4;
  }
  BoundaryPredicate freeze_boundary() const override;
  uint8_t open_dirs(const Site& z) const override;

  bool edge_open(const Site& z, int dir) const;
  bool staying() const { return pending_stay_; }
  bool visited(const Site& z) const { return visited_.count(z) != 0; }
  long time() const { return t_; }

 private:
  void arrive(const Site& z);
  int open_count(const Site& z) const;

  BernoulliField d0_;
  Site pos_;
  std::unordered_set<Site, SiteHash> visited_;
  bool pending_stay_ = false;
  long t_ = 0;
};

// ---------------------------------------------------------------------------
// Coupled FOBT-biased / free-SRW pair (d = 2). When E's left edge is open
// the two walks share the uniform increment; otherwise E moves
// right/up/down with probability 1/3 each while R takes each direction with
// probability 1/4, split so that (E - R)_1 never decreases. Super-non-NV
// times m are those where {E_m, E_m - e1} is unvisited by E's past.

struct CoupledPair {
  Site e_final, r_final;
  long diff1_final = 0;
  bool monotone_ok = true;               // per-step (E - R)_1 check
  std::vector<std::pair<long, long>> diff1_at;  // (t, diff1) checkpoints
  long snn_count = 0;                    // super-non-NV times observed
  long snn_left_in_d0 = 0;               // ... whose left edge is in D0
  long moving_steps = 0;                 // steps that were not stay-puts
  std::array<long, 4> e_dir_counts{};    // over moving steps
  std::array<long, 4> r_dir_counts{};
};

CoupledPair coupled_biased_walk(const BernoulliField& d0, long horizon,
                                RngBundle& rng,
                                const std::vector<long>& checkpoints = {});

}  // namespace latgrow
