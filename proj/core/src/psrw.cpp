#include "latgrow/psrw.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace latgrow {

BudgetReport budget_report(const ProbeBudget& budget,
                           const std::vector<long>& checkpoints) {
  BudgetReport rep;
  size_t n = budget.m.size();
  for (long t : checkpoints)
    if (t >= 1 && static_cast<size_t>(t) <= n)
      rep.mbar_at.emplace_back(t, budget.mbar(static_cast<size_t>(t)));
  if (n > 0) {
    size_t from = n / 2;
    long tail = budget.cumsum[n - 1] - (from > 0 ? budget.cumsum[from - 1] : 0);
    rep.trailing_mbar = static_cast<double>(tail) / static_cast<double>(n - from);
  }
  return rep;
}

LatticeClass stretched_membership(const Site& z, int L, int d) {
  if (L < 2) throw std::invalid_argument("stretched_membership: L must be >= 2");
  int mult = 0;
  for (int i = 0; i < d; ++i)
    if (z[i] % L == 0) ++mult;
  if (mult == d) return LatticeClass::Junction;
  return mult > 0 ? LatticeClass::Lattice : LatticeClass::Off;
}

// ---------------------------------------------------------------------------

GuidedPsrwModel::GuidedPsrwModel(int d, int L, GuidedVariant variant, Site start)
    : d_(d), L_(L), variant_(variant), pos_(start) {
  if (variant == GuidedVariant::BiasedD2 && d != 2)
    throw std::invalid_argument("GuidedPsrwModel: biased variant requires d = 2");
  if (stretched_membership(pos_, L_, d_) == LatticeClass::Off)
    throw std::invalid_argument("GuidedPsrwModel: start off the stretched lattice");
  probe_at(pos_);
}

void GuidedPsrwModel::probe_at(const Site& z) {
  pending_m_ = 0;
  if (!visited_.insert(z).second) return;
  for (int dir = 0; dir < 2 * d_; ++dir) {
    if (variant_ == GuidedVariant::BiasedD2 && dir == 0) continue;
    Site n = neighbor(z, dir);
    if (stretched_membership(n, L_, d_) == LatticeClass::Off) continue;
    Edge e = Edge::incident(z, dir);
    if (open_.insert(e).second) ++pending_m_;
  }
}

uint8_t GuidedPsrwModel::open_dirs(const Site& z) const {
  uint8_t mask = 0;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (open_.count(Edge::incident(z, dir))) mask |= static_cast<uint8_t>(1u << dir);
  return mask;
}

void GuidedPsrwModel::advance(RngBundle& rng) {
  budget_.record(pending_m_);  // probes spent on arrival at the current site
  std::array<int, 2 * kMaxDim> cand{};
  int k = 0;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (open_.count(Edge::incident(pos_, dir))) cand[static_cast<size_t>(k++)] = dir;
  if (k == 0) throw std::runtime_error("GuidedPsrwModel: no open edge at position");
  pos_ = neighbor(pos_, cand[rng.main.below(static_cast<uint32_t>(k))]);
  probe_at(pos_);
}

// ---------------------------------------------------------------------------

FixedLatticeSrwModel::FixedLatticeSrwModel(int d, int L, Site start)
    : d_(d), L_(L), pos_(start) {
  if (stretched_membership(pos_, L_, d_) == LatticeClass::Off)
    throw std::invalid_argument("FixedLatticeSrwModel: start off the lattice");
}

uint8_t FixedLatticeSrwModel::open_dirs(const Site& z) const {
  uint8_t mask = 0;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (stretched_membership(neighbor(z, dir), L_, d_) != LatticeClass::Off)
      mask |= static_cast<uint8_t>(1u << dir);
  return mask;
}

void FixedLatticeSrwModel::advance(RngBundle& rng) {
  std::array<int, 2 * kMaxDim> cand{};
  int k = 0;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (stretched_membership(neighbor(pos_, dir), L_, d_) != LatticeClass::Off)
      cand[static_cast<size_t>(k++)] = dir;
  pos_ = neighbor(pos_, cand[rng.main.below(static_cast<uint32_t>(k))]);
}

// ---------------------------------------------------------------------------

LinePsrwModel::LinePsrwModel(int d, long M) : d_(d), M_(M) {
  if (M < 1) throw std::invalid_argument("LinePsrwModel: M must be >= 1");
}

void LinePsrwModel::advance(RngBundle& rng) {
  half_ += M_;  // M new edges on each side of the interval
  budget_.record(static_cast<int>(2 * M_));
  pos_[0] += rng.main.below(2) ? 1 : -1;
}

// ---------------------------------------------------------------------------

Site unguided_probe(const std::unordered_set<Site, SiteHash>& dom, int d,
                    const Site& pos, RngStream& rng, long cap, int max_retries) {
  if (!dom.count(pos))
    throw std::invalid_argument("unguided_probe: start not in domain");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Site cur = pos;
    for (long step = 0; step < cap; ++step) {
      cur = neighbor(cur, static_cast<int>(rng.below(static_cast<uint32_t>(2 * d))));
      if (!dom.count(cur)) return cur;
    }
  }
  throw std::runtime_error(
      "unguided_probe: cap exhausted " + std::to_string(max_retries) +
      " times from " + pos.to_string(d) + " (domain size " +
      std::to_string(dom.size()) + ")");
}

CouponPsrwModel::CouponPsrwModel(int d, long probe_cap)
    : d_(d), cap_(probe_cap) {
  dom_.insert(Site());
}

int CouponPsrwModel::fill_ball(const Site& z, RngBundle& rng) {
  int m = 0;
  while (true) {
    bool missing = false;
    for (int dir = 0; dir < 2 * d_ && !missing; ++dir)
      if (!dom_.count(neighbor(z, dir))) missing = true;
    if (!missing) break;
    dom_.insert(unguided_probe(dom_, d_, z, rng.probe, cap_));
    ++m;
  }
  return m;
}

void CouponPsrwModel::advance(RngBundle& rng) {
  if (visited_.insert(pos_).second) {
    int m = fill_ball(pos_, rng);
    first_visit_m_.push_back(m);
    budget_.record(m);
  } else {
    budget_.record(0);
  }
  pos_ = neighbor(pos_, static_cast<int>(rng.main.below(static_cast<uint32_t>(2 * d_))));
}

}  // namespace latgrow
