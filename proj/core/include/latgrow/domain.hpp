#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "latgrow/rng.hpp"
#include "latgrow/site.hpp"

namespace latgrow {

struct GrowthRecord {
  long t = 0;
  std::vector<Edge> edges;  // edges actually added (may be empty)
};

/// The monotone open-edge set G_t together with per-site degrees and the
/// boundary set (sites whose degree is below the full Z^d degree 2d).
/// Edges are only ever added, never removed.
class GrowingDomain {
 public:
  explicit GrowingDomain(int dim);

  int dim() const { return d_; }
  int full_degree() const { return 2 * d_; }

  bool has_site(const Site& z) const { return mask_.count(z) != 0; }
  void add_site(const Site& z);

  int degree(const Site& z) const;
  uint8_t open_dirs(const Site& z) const;
  bool edge_open(const Site& z, int dir) const;
  bool edge_open(const Edge& e) const { return edge_open(e.lo, 2 * e.axis + 1); }

  /// Adds one edge immediately (no log entry). Returns true if it was new.
  bool add_edge_raw(const Edge& e);

  /// Grows the domain by a batch of edges, appending one growth-log record
  /// stamped `t` (recording only the edges that were actually new).
  /// Idempotent for already-open edges.
  void add_edges(std::span<const Edge> edges, long t);
  void add_edges(const std::vector<Edge>& edges, long t) {
    add_edges(std::span<const Edge>(edges), t);
  }

  /// Opens all 2d edges incident to z (the open-by-touch move), logged at t.
  void open_ball_edges(const Site& z, long t);

  bool on_boundary(const Site& z) const;
  const std::unordered_set<Site, SiteHash>& boundary() const { return boundary_; }

  size_t site_count() const { return mask_.size(); }
  size_t edge_count() const { return edge_count_; }

  const std::unordered_map<Site, uint8_t, SiteHash>& sites() const { return mask_; }
  const std::vector<GrowthRecord>& growth_log() const { return log_; }

  /// Serializes the growth log as JSONL records {"t":..,"edges":[[x...],[y...]],..}.
  void write_growth_log(std::ostream& os) const;

 private:
  void set_bit(const Site& z, int dir);

  int d_;
  std::unordered_map<Site, uint8_t, SiteHash> mask_;  // bit per direction
  std::unordered_set<Site, SiteHash> boundary_;
  std::vector<GrowthRecord> log_;
  size_t edge_count_ = 0;
};

enum class Metric { Graph, EuclideanProjected };

/// Ball domain: sites with dist(z, center) <= r under the metric, all internal
/// edges open. Throws for r < 1.
GrowingDomain ball(const Site& center, double r, Metric metric, int d);

/// Membership test used by ball(); Euclidean radii compare in exact integer
/// arithmetic against floor(r^2).
bool in_ball(const Site& z, const Site& center, double r, Metric metric, int d);

/// Lazy i.i.d. Bernoulli(p) edge field: each edge's presence is a pure
/// function of (key, canonical edge id), so unbounded initial domains need no
/// materialization.
struct BernoulliField {
  uint64_t key = 0;
  double p = 0.0;
  bool open(const Edge& e) const { return RngStream::coin(key, e.id(), p); }
};

/// Materializes the Bernoulli field on the box [-w,w]^d: all box sites
/// present, each box edge open independently with probability p.
/// Throws unless 0 <= p < 1.
GrowingDomain bernoulli_domain(double p, int box_halfwidth, uint64_t seed, int d);

/// The field backing bernoulli_domain for the same seed, for lazy reveals
/// outside the box.
BernoulliField bernoulli_field(double p, uint64_t seed);

}  // namespace latgrow
