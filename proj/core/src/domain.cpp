#include "latgrow/domain.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace latgrow {

GrowingDomain::GrowingDomain(int dim) : d_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("GrowingDomain: dimension must be in [1," +
                                std::to_string(kMaxDim) + "]");
}

void GrowingDomain::add_site(const Site& z) {
  auto [it, inserted] = mask_.try_emplace(z, 0);
  if (inserted) boundary_.insert(z);  // degree 0 < 2d
}

int GrowingDomain::degree(const Site& z) const {
  auto it = mask_.find(z);
  if (it == mask_.end()) return 0;
  return std::popcount(static_cast<unsigned>(it->second));
}

uint8_t GrowingDomain::open_dirs(const Site& z) const {
  auto it = mask_.find(z);
  return it == mask_.end() ? 0 : it->second;
}

bool GrowingDomain::edge_open(const Site& z, int dir) const {
  auto it = mask_.find(z);
  return it != mask_.end() && (it->second >> dir) & 1;
}

void GrowingDomain::set_bit(const Site& z, int dir) {
  auto [it, inserted] = mask_.try_emplace(z, 0);
  it->second |= static_cast<uint8_t>(1u << dir);
  if (std::popcount(static_cast<unsigned>(it->second)) == full_degree())
    boundary_.erase(z);
  else if (inserted)
    boundary_.insert(z);
}

bool GrowingDomain::add_edge_raw(const Edge& e) {
  if (e.axis < 0 || e.axis >= d_)
    throw std::invalid_argument("add_edge: axis out of range for dimension");
  int dir_up = 2 * e.axis + 1;
  if (edge_open(e.lo, dir_up)) return false;
  set_bit(e.lo, dir_up);
  set_bit(e.hi(), dir_opposite(dir_up));
  ++edge_count_;
  return true;
}

void GrowingDomain::add_edges(std::span<const Edge> edges, long t) {
  GrowthRecord rec;
  rec.t = t;
  for (const Edge& e : edges)
    if (add_edge_raw(e)) rec.edges.push_back(e);
  log_.push_back(std::move(rec));
}

void GrowingDomain::open_ball_edges(const Site& z, long t) {
  GrowthRecord rec;
  rec.t = t;
  for (int dir = 0; dir < full_degree(); ++dir) {
    Edge e = Edge::incident(z, dir);
    if (add_edge_raw(e)) rec.edges.push_back(e);
  }
  log_.push_back(std::move(rec));
}

bool GrowingDomain::on_boundary(const Site& z) const {
  auto it = mask_.find(z);
  return it != mask_.end() &&
         std::popcount(static_cast<unsigned>(it->second)) < full_degree();
}

void GrowingDomain::write_growth_log(std::ostream& os) const {
  for (const GrowthRecord& rec : log_) {
    os << "{\"t\":" << rec.t << ",\"edges\":[";
    bool first = true;
    for (const Edge& e : rec.edges) {
      if (!first) os << ',';
      first = false;
      Site a = e.lo, b = e.hi();
      os << "[[";
      for (int i = 0; i < d_; ++i) os << (i ? "," : "") << a[i];
      os << "],[";
      for (int i = 0; i < d_; ++i) os << (i ? "," : "") << b[i];
      os << "]]";
    }
    os << "]}\n";
  }
}

bool in_ball(const Site& z, const Site& center, double r, Metric metric, int d) {
  if (metric == Metric::Graph) {
    auto rad = static_cast<int64_t>(std::floor(r + 1e-9));
    return l1_dist(z, center, d) <= rad;
  }
  auto r2 = static_cast<int64_t>(std::floor(r * r + 1e-9));
  int64_t s = 0;
  for (int i = 0; i < d; ++i) {
    int64_t dx = static_cast<int64_t>(z[i]) - center[i];
    s += dx * dx;
  }
  return s <= r2;
}

GrowingDomain ball(const Site& center, double r, Metric metric, int d) {
  if (r < 1) throw std::invalid_argument("ball: radius must be >= 1");
  GrowingDomain dom(d);
  auto w = static_cast<int32_t>(std::floor(r + 1e-9));
  std::vector<Edge> edges;
  Site z = center;
  // Enumerate the box [-w,w]^d around the center.
  std::array<int32_t, kMaxDim> off{};
  for (int i = 0; i < d; ++i) off[static_cast<size_t>(i)] = -w;
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = center[i] + off[static_cast<size_t>(i)];
    if (in_ball(z, center, r, metric, d)) {
      dom.add_site(z);
      for (int axis = 0; axis < d; ++axis) {
        Site up = neighbor(z, 2 * axis + 1);
        if (in_ball(up, center, r, metric, d)) edges.emplace_back(z, axis);
      }
    }
    int axis = 0;
    while (axis < d && ++off[static_cast<size_t>(axis)] > w) {
      off[static_cast<size_t>(axis)] = -w;
      ++axis;
    }
    if (axis == d) break;
  }
  dom.add_edges(edges, 0);
  return dom;
}

BernoulliField bernoulli_field(double p, uint64_t seed) {
  return BernoulliField{RngStream::derive(seed, 0, "bernoulli-field").key(), p};
}

GrowingDomain bernoulli_domain(double p, int box_halfwidth, uint64_t seed, int d) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("bernoulli_domain: p must be in [0,1)");
  BernoulliField field = bernoulli_field(p, seed);
  GrowingDomain dom(d);
  int w = box_halfwidth;
  std::vector<Edge> edges;
  Site z;
  std::array<int32_t, kMaxDim> off{};
  for (int i = 0; i < d; ++i) off[static_cast<size_t>(i)] = -w;
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = off[static_cast<size_t>(i)];
    dom.add_site(z);
    for (int axis = 0; axis < d; ++axis) {
      if (z[axis] >= w) continue;  // edge leaves the box
      Edge e(z, axis);
      if (field.open(e)) edges.push_back(e);
    }
    int axis = 0;
    while (axis < d && ++off[static_cast<size_t>(axis)] > w) {
      off[static_cast<size_t>(axis)] = -w;
      ++axis;
    }
    if (axis == d) break;
  }
  dom.add_edges(edges, 0);
  return dom;
}

}  // namespace latgrow
