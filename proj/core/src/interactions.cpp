#include "latgrow/interactions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace latgrow {

void obt_update(GrowingDomain& dom, const Site& pos, long t) {
  if (!dom.on_boundary(pos)) return;
  dom.open_ball_edges(pos, t);
}

bool pobt_update(GrowingDomain& dom, const Site& pos, long t, double epsilon,
                 PobtRule rule, RngStream& rng) {
  if (epsilon <= 0.0) throw std::invalid_argument("pobt_update: epsilon must be > 0");
  if (!dom.on_boundary(pos)) return false;
  if (epsilon < 1.0 && !rng.bernoulli(epsilon)) return false;
  std::vector<Edge> closed;
  for (int dir = 0; dir < 2 * dom.dim(); ++dir)
    if (!dom.edge_open(pos, dir)) closed.push_back(Edge::incident(pos, dir));
  if (closed.empty()) return false;
  if (rule == PobtRule::OneUniform) {
    Edge pick = closed[rng.below(static_cast<uint32_t>(closed.size()))];
    closed.assign(1, pick);
  }
  dom.add_edges(closed, t);
  return true;
}

void robt_update(GrowingDomain& dom, const Site& pos, long t, int bound,
                 long radius, RngStream& rng) {
  if (!dom.on_boundary(pos)) return;
  int d = dom.dim();
  // Candidate closed edges with lower endpoint within the l1 ball.
  std::vector<Edge> cand;
  std::array<int32_t, kMaxDim> off{};
  for (int i = 0; i < d; ++i) off[static_cast<size_t>(i)] = static_cast<int32_t>(-radius);
  while (true) {
    int64_t l1 = 0;
    Site z = pos;
    for (int i = 0; i < d; ++i) {
      z[i] += off[static_cast<size_t>(i)];
      l1 += std::abs(static_cast<int64_t>(off[static_cast<size_t>(i)]));
    }
    if (l1 <= radius)
      for (int axis = 0; axis < d; ++axis) {
        Edge e(z, axis);
        if (!dom.edge_open(e)) cand.push_back(e);
      }
    int axis = 0;
    while (axis < d &&
           ++off[static_cast<size_t>(axis)] > static_cast<int32_t>(radius)) {
      off[static_cast<size_t>(axis)] = static_cast<int32_t>(-radius);
      ++axis;
    }
    if (axis == d) break;
  }
  size_t take = std::min<size_t>(static_cast<size_t>(bound), cand.size());
  for (size_t i = 0; i < take; ++i) {
    size_t j = i + rng.below(static_cast<uint32_t>(cand.size() - i));
    std::swap(cand[i], cand[j]);
  }
  cand.resize(take);
  dom.add_edges(cand, t);
}

std::vector<double> drift_step_distribution(const Site& pos, int d, double delta,
                                            uint8_t avail) {
  int navail = std::popcount(avail);
  if (navail == 0)
    throw std::runtime_error("drift_step_distribution: no available direction");

  int64_t l1 = l1_norm(pos, d);
  std::vector<double> mu(static_cast<size_t>(d), 0.0);
  if (l1 > 0)
    for (int i = 0; i < d; ++i)
      mu[static_cast<size_t>(i)] =
          -delta * static_cast<double>(pos[i]) / static_cast<double>(l1);

  auto probs_of = [&](const std::vector<double>& lam) {
    std::vector<double> p(static_cast<size_t>(2 * d), 0.0);
    double z = 0.0;
    for (int dir = 0; dir < 2 * d; ++dir)
      if ((avail >> dir) & 1) {
        double w = std::exp(dir_sign(dir) * lam[static_cast<size_t>(dir_axis(dir))]);
        p[static_cast<size_t>(dir)] = w;
        z += w;
      }
    for (double& v : p) v /= z;
    return p;
  };
  auto mean_of = [&](const std::vector<double>& p) {
    std::vector<double> m(static_cast<size_t>(d), 0.0);
    for (int dir = 0; dir < 2 * d; ++dir)
      m[static_cast<size_t>(dir_axis(dir))] +=
          dir_sign(dir) * p[static_cast<size_t>(dir)];
    return m;
  };

  // Exponential tilt of the uniform step matching the target mean; the
  // Jacobian of the mean in the tilt parameter is the step covariance.
  // Infeasible targets (blocked directions) are halved until Newton lands.
  std::vector<double> lam(static_cast<size_t>(d), 0.0);
  std::vector<double> p = probs_of(lam);
  for (double shrink = 1.0; shrink > 1e-3; shrink *= 0.5) {
    std::fill(lam.begin(), lam.end(), 0.0);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      p = probs_of(lam);
      std::vector<double> m = mean_of(p);
      double err = 0.0;
      std::vector<double> g(static_cast<size_t>(d));
      for (int i = 0; i < d; ++i) {
        g[static_cast<size_t>(i)] = shrink * mu[static_cast<size_t>(i)] -
                                    m[static_cast<size_t>(i)];
        err = std::max(err, std::fabs(g[static_cast<size_t>(i)]));
      }
      if (err < 1e-13) {
        converged = true;
        break;
      }
      // J = Cov(v) under p, regularized.
      std::vector<double> J(static_cast<size_t>(d * d), 0.0);
      for (int i = 0; i < d; ++i) {
        double sec = p[static_cast<size_t>(2 * i)] + p[static_cast<size_t>(2 * i + 1)];
        J[static_cast<size_t>(i * d + i)] =
            sec - m[static_cast<size_t>(i)] * m[static_cast<size_t>(i)] + 1e-12;
        for (int j = i + 1; j < d; ++j) {
          double c = -m[static_cast<size_t>(i)] * m[static_cast<size_t>(j)];
          J[static_cast<size_t>(i * d + j)] = c;
          J[static_cast<size_t>(j * d + i)] = c;
        }
      }
      // Tiny Gaussian elimination.
      for (int k = 0; k < d; ++k) {
        int piv = k;
        for (int r = k + 1; r < d; ++r)
          if (std::fabs(J[static_cast<size_t>(r * d + k)]) >
              std::fabs(J[static_cast<size_t>(piv * d + k)]))
            piv = r;
        for (int cix = 0; cix < d; ++cix)
          std::swap(J[static_cast<size_t>(k * d + cix)],
                    J[static_cast<size_t>(piv * d + cix)]);
        std::swap(g[static_cast<size_t>(k)], g[static_cast<size_t>(piv)]);
        for (int r = k + 1; r < d; ++r) {
          double f = J[static_cast<size_t>(r * d + k)] / J[static_cast<size_t>(k * d + k)];
          for (int cix = k; cix < d; ++cix)
            J[static_cast<size_t>(r * d + cix)] -= f * J[static_cast<size_t>(k * d + cix)];
          g[static_cast<size_t>(r)] -= f * g[static_cast<size_t>(k)];
        }
      }
      for (int k = d - 1; k >= 0; --k) {
        double acc = g[static_cast<size_t>(k)];
        for (int cix = k + 1; cix < d; ++cix)
          acc -= J[static_cast<size_t>(k * d + cix)] * g[static_cast<size_t>(cix)];
        g[static_cast<size_t>(k)] = acc / J[static_cast<size_t>(k * d + k)];
      }
      bool bad = false;
      for (int k = 0; k < d; ++k) {
        double step = g[static_cast<size_t>(k)];
        if (!std::isfinite(step) || std::fabs(step) > 50.0) bad = true;
        lam[static_cast<size_t>(k)] += step;
      }
      if (bad) break;
    }
    if (converged) return p;
  }
  return p;  // best effort when the exact mean is unreachable
}

// ---------------------------------------------------------------------------

ObtModel::ObtModel(GrowingDomain dom, ObtParams params, int d, Site start,
                   BoundaryPolicy policy)
    : dom_(std::move(dom)), params_(params), d_(d), pos_(start),
      policy_(std::move(policy)) {
  if (dom_.dim() != d) throw std::invalid_argument("ObtModel: dimension mismatch");
}

BoundaryPredicate ObtModel::freeze_boundary() const {
  auto snap = std::make_shared<std::unordered_set<Site, SiteHash>>(dom_.boundary());
  return [snap](const Site& z) { return snap->count(z) != 0; };
}

void ObtModel::boundary_move(RngBundle& rng) {
  if (policy_.kind == BoundaryPolicyKind::Scripted) {
    long r = policy_.radius ? policy_.radius(pos_) : 1;
    long rmax = static_cast<long>(policy_.c * static_cast<double>(l1_norm(pos_, d_)));
    if (r < 1 || r > rmax)
      throw std::runtime_error("ObtModel: scripted radius violates 1 <= r <= c|x|_1");
    Site target = policy_.script(pos_, t_);
    if (l1_dist(pos_, target, d_) > r || !dom_.has_site(target))
      throw std::runtime_error("ObtModel: scripted target outside G_t or C(Y_t)");
    pos_ = target;
    return;
  }
  // Drift to origin over the open axis steps.
  uint8_t avail = dom_.open_dirs(pos_);
  if (avail == 0) throw std::runtime_error("ObtModel: isolated position");
  if (pos_.is_origin()) {
    int k = std::popcount(avail);
    int pick = static_cast<int>(rng.main.below(static_cast<uint32_t>(k)));
    for (int dir = 0; dir < 2 * d_; ++dir)
      if ((avail >> dir) & 1 && pick-- == 0) {
        pos_ = neighbor(pos_, dir);
        return;
      }
    return;
  }
  std::vector<double> p = drift_step_distribution(pos_, d_, policy_.delta, avail);
  double u = rng.main.uniform01();
  double acc = 0.0;
  int chosen = -1;
  for (int dir = 0; dir < 2 * d_; ++dir) {
    acc += p[static_cast<size_t>(dir)];
    if (u < acc) {
      chosen = dir;
      break;
    }
  }
  if (chosen < 0)
    for (int dir = 2 * d_ - 1; dir >= 0; --dir)
      if ((avail >> dir) & 1) {
        chosen = dir;
        break;
      }
  pos_ = neighbor(pos_, chosen);
}

void ObtModel::advance(RngBundle& rng) {
  bool arrived_on_boundary = dom_.on_boundary(pos_);
  switch (params_.kind) {
    case ObtKind::None:
      break;
    case ObtKind::Obt:
      obt_update(dom_, pos_, t_);
      break;
    case ObtKind::Pobt:
      pobt_update(dom_, pos_, t_, params_.epsilon, params_.rule, rng.aux);
      break;
    case ObtKind::Fobt:
      if (visited_.insert(pos_).second) obt_update(dom_, pos_, t_);
      break;
    case ObtKind::Robt:
      robt_update(dom_, pos_, t_, params_.robt_bound, params_.robt_radius, rng.aux);
      break;
  }
  if (arrived_on_boundary && policy_.kind != BoundaryPolicyKind::Uniform) {
    boundary_move(rng);
  } else if (policy_.kind != BoundaryPolicyKind::Uniform) {
    // Extended SRW follows plain SRW on the full lattice off the boundary.
    pos_ = neighbor(pos_, static_cast<int>(rng.main.below(static_cast<uint32_t>(2 * d_))));
  } else {
    uint8_t mask = dom_.open_dirs(pos_);
    int k = std::popcount(mask);
    if (k == 0) throw std::runtime_error("ObtModel: isolated position");
    int pick = static_cast<int>(rng.main.below(static_cast<uint32_t>(k)));
    for (int dir = 0; dir < 2 * d_; ++dir)
      if ((mask >> dir) & 1 && pick-- == 0) {
        pos_ = neighbor(pos_, dir);
        break;
      }
  }
  ++t_;
}

// ---------------------------------------------------------------------------
// FOBT-biased machinery. Edge-open rule shared with the coupled walk:
// a horizontal edge is open iff its lower endpoint was first-visited (the
// visit opened its right edge) or the edge is in D0; a vertical edge is
// open iff either endpoint was visited (up edge of the lower, down edge of
// the upper) or it is in D0.

namespace {

bool fb_edge_open(const std::unordered_set<Site, SiteHash>& visited,
                  const BernoulliField& d0, const Site& z, int dir) {
  Edge e = Edge::incident(z, dir);
  if (d0.p > 0.0 && d0.open(e)) return true;
  if (e.axis == 0) return visited.count(e.lo) != 0;
  return visited.count(e.lo) != 0 || visited.count(e.hi()) != 0;
}

}  // namespace

FobtBiasedModel::FobtBiasedModel(BernoulliField d0, Site start)
    : d0_(d0), pos_(start) {
  arrive(pos_);
}

bool FobtBiasedModel::edge_open(const Site& z, int dir) const {
  return fb_edge_open(visited_, d0_, z, dir);
}

uint8_t FobtBiasedModel::open_dirs(const Site& z) const {
  uint8_t mask = 0;
  for (int dir = 0; dir < 4; ++dir)
    if (edge_open(z, dir)) mask |= static_cast<uint8_t>(1u << dir);
  return mask;
}

int FobtBiasedModel::open_count(const Site& z) const {
  return std::popcount(open_dirs(z));
}

void FobtBiasedModel::arrive(const Site& z) {
  if (visited_.count(z)) return;
  bool any_closed = false;
  for (int dir = 1; dir < 4; ++dir)  // right, down, up
    if (!edge_open(z, dir)) any_closed = true;
  visited_.insert(z);
  pending_stay_ = any_closed;  // a stay-put only when something opened
}

BoundaryPredicate FobtBiasedModel::freeze_boundary() const {
  auto snap = std::make_shared<std::unordered_set<Site, SiteHash>>(visited_);
  BernoulliField d0 = d0_;
  return [snap, d0](const Site& z) {
    for (int dir = 0; dir < 4; ++dir)
      if (!fb_edge_open(*snap, d0, z, dir)) return true;
    return false;
  };
}

void FobtBiasedModel::advance(RngBundle& rng) {
  if (pending_stay_) {
    pending_stay_ = false;
    ++t_;
    return;
  }
  uint8_t mask = open_dirs(pos_);
  int k = std::popcount(mask);
  int pick = static_cast<int>(rng.main.below(static_cast<uint32_t>(k)));
  for (int dir = 0; dir < 4; ++dir)
    if ((mask >> dir) & 1 && pick-- == 0) {
      pos_ = neighbor(pos_, dir);
      break;
    }
  ++t_;
  arrive(pos_);
}

// ---------------------------------------------------------------------------

CoupledPair coupled_biased_walk(const BernoulliField& d0, long horizon,
                                RngBundle& rng,
                                const std::vector<long>& checkpoints) {
  std::unordered_set<Site, SiteHash> visited;
  Site e, r;
  bool pending_stay = false;

  auto arrive = [&](const Site& z) {
    if (visited.count(z)) return;
    bool any_closed = false;
    for (int dir = 1; dir < 4; ++dir)
      if (!fb_edge_open(visited, d0, z, dir)) any_closed = true;
    visited.insert(z);
    pending_stay = any_closed;
  };
  arrive(e);

  CoupledPair out;
  std::vector<long> cps = checkpoints;
  std::sort(cps.begin(), cps.end());
  size_t next_cp = 0;

  long diff1 = 0;
  const int nonleft[3] = {1, 2, 3};
  for (long t = 0; t < horizon; ++t) {
    while (next_cp < cps.size() && cps[next_cp] == t) {
      out.diff1_at.emplace_back(t, diff1);
      ++next_cp;
    }
    if (pending_stay) {
      pending_stay = false;  // E stays put; R holds with it
      continue;
    }
    int de, dr;
    if (fb_edge_open(visited, d0, e, 0)) {
      de = dr = static_cast<int>(rng.main.below(4));
    } else {
      uint32_t u = rng.main.below(12);
      if (u < 9) {
        de = dr = nonleft[u / 3];
      } else {
        de = nonleft[u - 9];
        dr = 0;
      }
    }
    long prev = diff1;
    e = neighbor(e, de);
    r = neighbor(r, dr);
    diff1 = static_cast<long>(e[0]) - static_cast<long>(r[0]);
    if (diff1 < prev) out.monotone_ok = false;
    ++out.moving_steps;
    ++out.e_dir_counts[static_cast<size_t>(de)];
    ++out.r_dir_counts[static_cast<size_t>(dr)];
    // Super-non-NV: E's new site and its left neighbor both unvisited.
    if (!visited.count(e) && !visited.count(neighbor(e, 0))) {
      ++out.snn_count;
      if (d0.p > 0.0 && d0.open(Edge::incident(e, 0))) ++out.snn_left_in_d0;
    }
    arrive(e);
  }
  while (next_cp < cps.size() && cps[next_cp] <= horizon) {
    out.diff1_at.emplace_back(cps[next_cp], diff1);
    ++next_cp;
  }
  out.e_final = e;
  out.r_final = r;
  out.diff1_final = diff1;
  return out;
}

}  // namespace latgrow
