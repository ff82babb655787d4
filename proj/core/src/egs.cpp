#include "latgrow/egs.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace latgrow {

namespace {

int64_t isqrt64(int64_t n) {
  if (n < 0) return -1;
  auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
  while ((r + 1) * (r + 1) <= n) ++r;
  while (r * r > n) --r;
  return r;
}

// Length of the contiguous run of the ball along one axis, given the other
// coordinates; -1 when the column misses the ball.
int64_t column_extent(double r, Metric metric, int64_t other_l1, int64_t other_l2sq) {
  if (metric == Metric::Graph) {
    auto bound = static_cast<int64_t>(std::floor(r + 1e-9));
    int64_t rem = bound - other_l1;
    return rem < 0 ? -1 : 2 * rem + 1;
  }
  auto r2 = static_cast<int64_t>(std::floor(r * r + 1e-9));
  int64_t rem = r2 - other_l2sq;
  return rem < 0 ? -1 : 2 * isqrt64(rem) + 1;
}

template <typename F>
void for_each_column(double r, int d, F&& fn) {
  // Iterate the d-1 transverse coordinates of the ball's bounding box.
  auto bound = static_cast<int64_t>(std::floor(r + 1e-9));
  if (d == 1) {
    fn(int64_t{0}, int64_t{0});
    return;
  }
  std::array<int64_t, kMaxDim> off{};
  off.fill(-bound);
  while (true) {
    int64_t l1 = 0, l2 = 0;
    for (int i = 0; i < d - 1; ++i) {
      l1 += std::abs(off[static_cast<size_t>(i)]);
      l2 += off[static_cast<size_t>(i)] * off[static_cast<size_t>(i)];
    }
    fn(l1, l2);
    int axis = 0;
    while (axis < d - 1 && ++off[static_cast<size_t>(axis)] > bound) {
      off[static_cast<size_t>(axis)] = -bound;
      ++axis;
    }
    if (axis == d - 1) break;
  }
}

}  // namespace

long ball_site_count(double r, Metric metric, int d) {
  int64_t total = 0;
  for_each_column(r, d, [&](int64_t l1, int64_t l2) {
    int64_t e = column_extent(r, metric, l1, l2);
    if (e > 0) total += e;
  });
  return static_cast<long>(total);
}

long ball_edge_count(double r, Metric metric, int d) {
  // Balls around 0 are symmetric under coordinate permutation, so the edge
  // count along one axis times d is the total.
  int64_t along = 0;
  for_each_column(r, d, [&](int64_t l1, int64_t l2) {
    int64_t e = column_extent(r, metric, l1, l2);
    if (e > 1) along += e - 1;
  });
  return static_cast<long>(along * d);
}

EgsModel::EgsModel(int d, double c, Schedule sched, Metric metric, long k0,
                   Site start)
    : d_(d), c_(c), sched_(std::move(sched)), metric_(metric), k_(k0),
      pos_(start) {
  if (c < 1.0) throw std::invalid_argument("EgsModel: expansion factor c must be >= 1");
  if (k0 < 1) throw std::invalid_argument("EgsModel: k0 must be >= 1");
  if (!in_shell(pos_, k_))
    throw std::invalid_argument("EgsModel: start outside the initial shell");
  tau_.emplace_back(k_, 0);
}

bool EgsModel::in_shell(const Site& z, long k) const {
  return in_ball(z, Site(), c_ * static_cast<double>(k), metric_, d_);
}

bool EgsModel::on_shell_boundary(const Site& z, long k) const {
  if (!in_shell(z, k)) return false;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (!in_shell(neighbor(z, dir), k)) return true;
  return false;
}

uint8_t EgsModel::open_dirs(const Site& z) const {
  if (!in_shell(z, k_)) return 0;
  uint8_t mask = 0;
  for (int dir = 0; dir < 2 * d_; ++dir)
    if (in_shell(neighbor(z, dir), k_)) mask |= static_cast<uint8_t>(1u << dir);
  return mask;
}

BoundaryPredicate EgsModel::freeze_boundary() const {
  long k = k_;
  return [this, k](const Site& z) { return on_shell_boundary(z, k); };
}

long EgsModel::domain_sites() const {
  return ball_site_count(c_ * static_cast<double>(k_), metric_, d_);
}

long EgsModel::domain_edges() const {
  return ball_edge_count(c_ * static_cast<double>(k_), metric_, d_);
}

void EgsModel::advance(RngBundle& rng) {
  if (on_shell_boundary(pos_, k_)) ++hits_;
  uint8_t mask = open_dirs(pos_);
  int kcnt = std::popcount(mask);
  int pick = static_cast<int>(rng.main.below(static_cast<uint32_t>(kcnt)));
  for (int dir = 0; dir < 2 * d_; ++dir)
    if ((mask >> dir) & 1 && pick-- == 0) {
      pos_ = neighbor(pos_, dir);
      break;
    }
  ++t_;
  if (hits_ == sched_.N(k_)) {
    ++k_;
    hits_ = 0;
    tau_.emplace_back(k_, t_);
  }
}

// ---------------------------------------------------------------------------

LayeredChainModel::LayeredChainModel(std::function<double(long)> p_up,
                                     std::function<double(long)> q,
                                     Schedule sched, RngStream budget_rng,
                                     long frontier0)
    : p_up_(std::move(p_up)), q_(std::move(q)), sched_(std::move(sched)),
      budget_rng_(budget_rng), frontier_(frontier0) {
  if (frontier0 < 1)
    throw std::invalid_argument("LayeredChainModel: frontier0 must be >= 1");
  long n = sched_.N(frontier_);
  double qk = q_(frontier_);
  budget_ = 0;
  for (long i = 0; i < n; ++i)
    if (budget_rng_.bernoulli(qk)) ++budget_;
}

void LayeredChainModel::open_next() {
  ++frontier_;
  long n = sched_.N(frontier_);
  double qk = q_(frontier_);
  budget_ = 0;
  for (long i = 0; i < n; ++i)
    if (budget_rng_.bernoulli(qk)) ++budget_;
}

uint8_t LayeredChainModel::open_dirs(const Site& z) const {
  long x = z[0];
  if (x < 0 || x > frontier_) return 0;
  uint8_t mask = 0;
  if (x >= 1) mask |= 1;                 // down
  if (x < frontier_) mask |= 2;          // up
  return mask;
}

void LayeredChainModel::advance(RngBundle& rng) {
  long x = pos_[0];
  // Zero budgets open the frontier edge as soon as the walk arrives there.
  while (x == frontier_ && budget_ == 0) open_next();
  if (x == 0) {
    pos_[0] = 1;  // reflecting step, no randomness consumed
    return;
  }
  if (x == frontier_) {
    pos_[0] = static_cast<int32_t>(x - 1);  // only the down edge is open
    if (--budget_ == 0) open_next();
    return;
  }
  double p = p_up_(x);
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("LayeredChainModel: p_up must be in (0,1)");
  pos_[0] = static_cast<int32_t>(rng.main.bernoulli(p) ? x + 1 : x - 1);
}

}  // namespace latgrow
