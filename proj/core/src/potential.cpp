#include "latgrow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace latgrow {

double DirichletField::at(const Site& z) const {
  auto it = value.find(z);
  if (it == value.end())
    throw std::out_of_range("DirichletField: site not in solved component");
  return it->second;
}

namespace {

// Interior system (D - A) h = b on the component of the start site.
struct AssembledSystem {
  std::vector<Site> interior;
  std::unordered_map<Site, int, SiteHash> index;
  std::vector<int> row_ptr, col;  // off-diagonal entries, coefficient -1
  std::vector<double> diag, b;
};

size_t n_of(const AssembledSystem& s) { return s.interior.size(); }

void matvec(const AssembledSystem& s, const std::vector<double>& x,
            std::vector<double>& y) {
  size_t n = n_of(s);
  for (size_t i = 0; i < n; ++i) {
    double acc = s.diag[i] * x[i];
    for (int j = s.row_ptr[i]; j < s.row_ptr[i + 1]; ++j)
      acc -= x[static_cast<size_t>(s.col[static_cast<size_t>(j)])];
    y[i] = acc;
  }
}

std::vector<double> cg_solve(const AssembledSystem& s, const std::vector<double>& rhs) {
  size_t n = n_of(s);
  std::vector<double> x(n, 0.0), r = rhs, p = rhs, ap(n);
  double rs = 0.0, bnorm = 0.0;
  for (size_t i = 0; i < n; ++i) {
    rs += r[i] * r[i];
    bnorm += rhs[i] * rhs[i];
  }
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) return x;
  const double tol = 1e-14 * bnorm;
  const long maxit = static_cast<long>(20 * n + 1000);
  for (long it = 0; it < maxit && std::sqrt(rs) > tol; ++it) {
    matvec(s, p, ap);
    double pap = 0.0;
    for (size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (pap <= 0.0) break;  // numerical breakdown; refinement recovers
    double alpha = rs / pap;
    double rs_new = 0.0;
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rs_new += r[i] * r[i];
    }
    double beta = rs_new / rs;
    rs = rs_new;
    for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return x;
}

// Residual in extended precision, so iterative refinement can push the
// forward error well below the CG stopping threshold.
std::vector<double> accurate_residual(const AssembledSystem& s,
                                      const std::vector<double>& x) {
  size_t n = n_of(s);
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    long double acc = static_cast<long double>(s.b[i]) -
                      static_cast<long double>(s.diag[i]) * x[i];
    for (int j = s.row_ptr[i]; j < s.row_ptr[i + 1]; ++j)
      acc += static_cast<long double>(x[static_cast<size_t>(s.col[static_cast<size_t>(j)])]);
    r[i] = static_cast<double>(acc);
  }
  return r;
}

std::vector<double> solve_iterative(const AssembledSystem& s) {
  std::vector<double> x = cg_solve(s, s.b);
  for (int round = 0; round < 3; ++round) {
    std::vector<double> r = accurate_residual(s, x);
    double rmax = 0.0;
    for (double v : r) rmax = std::max(rmax, std::fabs(v));
    if (rmax < 1e-15) break;
    std::vector<double> d = cg_solve(s, r);
    for (size_t i = 0; i < n_of(s); ++i) x[i] += d[i];
  }
  return x;
}

std::vector<double> solve_dense(const AssembledSystem& s) {
  size_t n = n_of(s);
  if (n >= 5000)
    throw std::invalid_argument("dense solve limited to systems under 5000 unknowns");
  std::vector<double> m(n * n, 0.0), rhs = s.b;
  for (size_t i = 0; i < n; ++i) {
    m[i * n + i] = s.diag[i];
    for (int j = s.row_ptr[i]; j < s.row_ptr[i + 1]; ++j)
      m[i * n + static_cast<size_t>(s.col[static_cast<size_t>(j)])] -= 1.0;
  }
  // LU with partial pivoting.
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    double best = std::fabs(m[perm[k] * n + k]);
    for (size_t i = k + 1; i < n; ++i) {
      double v = std::fabs(m[perm[i] * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw std::runtime_error("dense solve: singular system");
    std::swap(perm[k], perm[piv]);
    size_t rk = perm[k];
    for (size_t i = k + 1; i < n; ++i) {
      size_t ri = perm[i];
      double f = m[ri * n + k] / m[rk * n + k];
      if (f == 0.0) continue;
      m[ri * n + k] = f;
      for (size_t j = k + 1; j < n; ++j) m[ri * n + j] -= f * m[rk * n + j];
    }
  }
  std::vector<double> y(n), x(n);
  for (size_t i = 0; i < n; ++i) {
    double acc = rhs[perm[i]];
    for (size_t j = 0; j < i; ++j) acc -= m[perm[i] * n + j] * y[j];
    y[i] = acc;
  }
  for (size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (size_t j = ii + 1; j < n; ++j) acc -= m[perm[ii] * n + j] * x[j];
    x[ii] = acc / m[perm[ii] * n + ii];
  }
  return x;
}

AssembledSystem assemble(const DirichletProblem& p,
                         const std::unordered_map<Site, double, SiteHash>& absorbing) {
  const GrowingDomain& dom = *p.domain;
  AssembledSystem s;
  std::deque<Site> queue;
  std::unordered_set<Site, SiteHash> seen;
  bool absorbing_reached = false;

  // The flood passes through absorbing sites (they keep their fixed value and
  // never become unknowns) so regions behind the target still get solved.
  auto visit = [&](const Site& z) {
    if (!seen.insert(z).second) return;
    if (absorbing.count(z)) {
      absorbing_reached = true;
    } else {
      s.index.emplace(z, static_cast<int>(s.interior.size()));
      s.interior.push_back(z);
    }
    queue.push_back(z);
  };
  visit(p.start);
  while (!queue.empty()) {
    Site z = queue.front();
    queue.pop_front();
    uint8_t mask = dom.open_dirs(z);
    for (int dir = 0; dir < 2 * dom.dim(); ++dir)
      if ((mask >> dir) & 1) visit(neighbor(z, dir));
  }
  if (!absorbing_reached)
    throw std::runtime_error(
        "solve_hit_probability: start not connected to target or killing set");

  size_t n = s.interior.size();
  s.row_ptr.assign(n + 1, 0);
  s.diag.assign(n, 0.0);
  s.b.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const Site& z = s.interior[i];
    uint8_t mask = dom.open_dirs(z);
    int deg = 0;
    for (int dir = 0; dir < 2 * dom.dim(); ++dir) {
      if (!((mask >> dir) & 1)) continue;
      ++deg;
      Site nb = neighbor(z, dir);
      auto ab = absorbing.find(nb);
      if (ab != absorbing.end()) {
        s.b[i] += ab->second;
      } else {
        s.col.push_back(s.index.at(nb));
      }
    }
    if (deg == 0)
      throw std::runtime_error("solve_hit_probability: isolated site in component");
    s.diag[i] = deg;
    s.row_ptr[i + 1] = static_cast<int>(s.col.size());
  }
  return s;
}

}  // namespace

DirichletField solve_hit_probability(const DirichletProblem& p, SolveMethod method) {
  if (p.domain == nullptr)
    throw std::invalid_argument("solve_hit_probability: null domain");
  std::unordered_map<Site, double, SiteHash> absorbing;
  for (const Site& z : p.target) absorbing[z] = 1.0;
  for (const Site& z : p.killing) {
    if (absorbing.count(z) && absorbing[z] == 1.0)
      throw std::invalid_argument("solve_hit_probability: target and killing overlap");
    absorbing[z] = 0.0;
  }

  DirichletField field;
  for (const auto& [z, v] : absorbing) field.value.emplace(z, v);
  auto it = absorbing.find(p.start);
  if (it != absorbing.end()) return field;  // absorbed at time zero

  AssembledSystem sys = assemble(p, absorbing);
  std::vector<double> h =
      (method == SolveMethod::Dense) ? solve_dense(sys) : solve_iterative(sys);
  for (size_t i = 0; i < sys.interior.size(); ++i)
    field.value[sys.interior[i]] = h[i];

  // Harmonicity residual on the interior.
  const GrowingDomain& dom = *p.domain;
  double worst = 0.0;
  for (size_t i = 0; i < sys.interior.size(); ++i) {
    const Site& z = sys.interior[i];
    uint8_t mask = dom.open_dirs(z);
    double acc = 0.0;
    int deg = 0;
    for (int dir = 0; dir < 2 * dom.dim(); ++dir) {
      if (!((mask >> dir) & 1)) continue;
      acc += field.value.at(neighbor(z, dir));
      ++deg;
    }
    worst = std::max(worst, std::fabs(h[i] - acc / deg));
  }
  field.residual_inf = worst;
  return field;
}

double hit_probability(const DirichletProblem& p, SolveMethod method) {
  return solve_hit_probability(p, method).at(p.start);
}

std::unordered_map<Site, double, SiteHash> exit_measure(
    const std::unordered_set<Site, SiteHash>& dom, int d, const Site& start,
    SolveMethod method) {
  if (!dom.count(start)) throw std::invalid_argument("exit_measure: start not in domain");
  // Expected-visits system (2d I - A) v = 2d e_start on the domain sites,
  // with full Z^d adjacency (the probe walk ignores the open-edge structure).
  AssembledSystem s;
  s.interior.assign(dom.begin(), dom.end());
  std::sort(s.interior.begin(), s.interior.end());
  for (size_t i = 0; i < s.interior.size(); ++i)
    s.index.emplace(s.interior[i], static_cast<int>(i));
  size_t n = s.interior.size();
  s.row_ptr.assign(n + 1, 0);
  s.diag.assign(n, 2.0 * d);
  s.b.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (int dir = 0; dir < 2 * d; ++dir) {
      auto it = s.index.find(neighbor(s.interior[i], dir));
      if (it != s.index.end()) s.col.push_back(it->second);
    }
    s.row_ptr[i + 1] = static_cast<int>(s.col.size());
  }
  s.b[static_cast<size_t>(s.index.at(start))] = 2.0 * d;

  std::vector<double> v =
      (method == SolveMethod::Dense) ? solve_dense(s) : solve_iterative(s);

  std::unordered_map<Site, double, SiteHash> out;
  for (size_t i = 0; i < n; ++i) {
    for (int dir = 0; dir < 2 * d; ++dir) {
      Site nb = neighbor(s.interior[i], dir);
      if (!dom.count(nb)) out[nb] += v[i] / (2.0 * d);
    }
  }
  return out;
}

namespace {

// Calibration of the ever-hit-origin constants, frozen from
// calibrate_ever_hit_constant(3, 30, 15) and (4, 20, 10); audited by the
// test suite.
constexpr double kEverHitC3 = 0.970105341076;
constexpr double kEverHitC4 = 0.958954881562;

}  // namespace

double ever_hit_constant(int d) {
  switch (d) {
    case 3: return kEverHitC3;
    case 4: return kEverHitC4;
    default:
      throw std::invalid_argument("ever_hit_constant: requires d in {3,4}");
  }
}

double ever_hit_zero_bound(const Site& y, int d) {
  if (d <= 2) throw std::invalid_argument("ever_hit_zero_bound: requires d >= 3");
  int64_t r = l1_norm(y, d);
  if (r == 0) throw std::invalid_argument("ever_hit_zero_bound: y must be nonzero");
  return ever_hit_constant(d) * std::pow(static_cast<double>(r), 2.0 - d);
}

double calibrate_ever_hit_constant(int d, int radius, int sample_max_l1) {
  GrowingDomain dom = ball(Site(), radius, Metric::EuclideanProjected, d);
  std::vector<Site> shell(dom.boundary().begin(), dom.boundary().end());
  DirichletProblem p{&dom, {Site()}, shell, Site(1)};
  DirichletField field = solve_hit_probability(p);

  int64_t shell_l1 = std::numeric_limits<int64_t>::max();
  for (const Site& z : shell) shell_l1 = std::min(shell_l1, l1_norm(z, d));

  double best = 0.0;
  for (const auto& [z, h] : field.value) {
    int64_t r = l1_norm(z, d);
    if (r < 1 || r > sample_max_l1) continue;
    double denom = std::pow(static_cast<double>(r), 2.0 - d) -
                   std::pow(static_cast<double>(shell_l1), 2.0 - d);
    if (denom <= 0.0) continue;
    best = std::max(best, h / denom);
  }
  return 1.25 * best;
}

SStarReport s_star(const GrowingDomain& domain0,
                   const std::function<long(const Site&)>& correction_radius,
                   int d, long truncation_radius, long solve_radius,
                   SolveMethod method) {
  if (d <= 2)
    throw std::invalid_argument("s_star: meaningless for d <= 2 (ever-hit prob is 1)");

  std::vector<Site> bnd(domain0.boundary().begin(), domain0.boundary().end());
  std::sort(bnd.begin(), bnd.end());

  SStarReport rep;
  if (bnd.empty()) return rep;

  GrowingDomain solve_dom = ball(Site(), static_cast<double>(solve_radius),
                                 Metric::EuclideanProjected, d);
  std::vector<Site> shell(solve_dom.boundary().begin(), solve_dom.boundary().end());
  DirichletProblem prob{&solve_dom, {Site()}, shell, Site(1)};
  DirichletField field = solve_hit_probability(prob, method);
  double shell_tail = ever_hit_constant(d) *
                      std::pow(static_cast<double>(solve_radius), 2.0 - d);

  double lo_sum = 0.0, hi_sum = 0.0;
  for (const Site& x : bnd) {
    if (l1_norm(x, d) > truncation_radius) continue;
    long r = correction_radius(x);
    double lo = 0.0, hi = 0.0;
    bool inside = true;
    double field_max = 0.0;
    int64_t min_l1 = std::numeric_limits<int64_t>::max();
    // Enumerate C(x) = l1 ball of radius r around x.
    std::array<int32_t, kMaxDim> off{};
    for (int i = 0; i < d; ++i) off[static_cast<size_t>(i)] = static_cast<int32_t>(-r);
    while (true) {
      Site y = x;
      int64_t l1 = 0;
      for (int i = 0; i < d; ++i) {
        y[i] += off[static_cast<size_t>(i)];
        l1 += std::abs(static_cast<int64_t>(off[static_cast<size_t>(i)]));
      }
      if (l1 <= r) {
        min_l1 = std::min(min_l1, std::max<int64_t>(1, l1_norm(y, d)));
        auto it = field.value.find(y);
        if (it == field.value.end())
          inside = false;
        else
          field_max = std::max(field_max, it->second);
      }
      int axis = 0;
      while (axis < d && ++off[static_cast<size_t>(axis)] > r) {
        off[static_cast<size_t>(axis)] = static_cast<int32_t>(-r);
        ++axis;
      }
      if (axis == d) break;
    }
    if (inside) {
      lo = field_max;
      hi = field_max + shell_tail;
    } else {
      lo = 0.0;
      hi = ever_hit_constant(d) * std::pow(static_cast<double>(min_l1), 2.0 - d);
    }
    lo_sum += lo;
    hi_sum += hi;
    rep.lower_terms.push_back(lo);
    rep.upper_terms.push_back(hi);
    rep.lower_partial.push_back(lo_sum);
    rep.upper_partial.push_back(hi_sum);
  }
  return rep;
}

namespace {

// One-ring set of the radius-ck projected ball: interior sites adjacent to a
// degree-deficient site.
std::vector<Site> one_ring(const GrowingDomain& ball_dom, int d) {
  std::unordered_set<Site, SiteHash> ring;
  for (const Site& z : ball_dom.boundary())
    for (int dir = 0; dir < 2 * d; ++dir) {
      Site n = neighbor(z, dir);
      if (ball_dom.has_site(n) && !ball_dom.on_boundary(n)) ring.insert(n);
    }
  std::vector<Site> out(ring.begin(), ring.end());
  std::sort(out.begin(), out.end());
  return out;
}

DirichletField solve_ball_field(const GrowingDomain& dom, SolveMethod method) {
  std::vector<Site> shell(dom.boundary().begin(), dom.boundary().end());
  Site start;
  start[0] = 1;
  DirichletProblem p{&dom, {Site()}, shell, start};
  return solve_hit_probability(p, method);
}

}  // namespace

EgsBracket egs_bracket(const std::function<long(long)>& N, int d, double c,
                       long k_min, long k_max, SolveMethod method) {
  if (k_min < 1 || k_max < k_min)
    throw std::invalid_argument("egs_bracket: bad k range");
  EgsBracket out;
  GrowingDomain cur = ball(Site(), c * static_cast<double>(k_min),
                           Metric::EuclideanProjected, d);
  DirichletField field_cur = solve_ball_field(cur, method);
  double rec_sum = 0.0, trans_sum = 0.0;
  for (long k = k_min; k <= k_max; ++k) {
    GrowingDomain next = ball(Site(), c * static_cast<double>(k + 1),
                              Metric::EuclideanProjected, d);
    DirichletField field_next = solve_ball_field(next, method);

    std::vector<Site> ring = one_ring(cur, d);
    double inf_p = std::numeric_limits<double>::infinity(), sup_p = 0.0;
    for (const Site& z : ring) {
      inf_p = std::min(inf_p, field_cur.at(z));
      sup_p = std::max(sup_p, field_next.at(z));
    }
    if (ring.empty()) inf_p = 0.0;

    rec_sum += static_cast<double>(N(k)) * inf_p;
    trans_sum += static_cast<double>(N(k)) * sup_p;

    double kd = std::pow(static_cast<double>(k), d - 1.0);
    out.ks.push_back(k);
    out.inf_p.push_back(inf_p);
    out.sup_p.push_back(sup_p);
    out.rec_partial.push_back(rec_sum);
    out.trans_partial.push_back(trans_sum);
    out.norm_inf.push_back(kd * inf_p);
    out.norm_sup.push_back(kd * sup_p);
    if (d == 2)
      out.d2_lower.push_back(static_cast<double>(k) *
                             std::log(static_cast<double>(k)) * inf_p);

    cur = std::move(next);
    field_cur = std::move(field_next);
  }
  return out;
}

SEstimate s_estimator(const StoppingLog& log, const TermOracle& term) {
  SEstimate est;
  double lo_sum = 0.0, hi_sum = 0.0;
  for (const StoppingRecord& rec : log.records) {
    auto [lo, hi] = term(rec);
    if (lo < 0.0 || hi > 1.0 + 1e-12 || lo > hi + 1e-12)
      throw std::runtime_error("s_estimator: term oracle returned invalid bracket");
    lo_sum += lo;
    hi_sum += hi;
    est.lower_terms.push_back(lo);
    est.upper_terms.push_back(hi);
    est.lower_partial.push_back(lo_sum);
    est.upper_partial.push_back(hi_sum);
  }
  // Slope test on dyadic increments of the midpoint partial sums.
  size_t n = est.lower_partial.size();
  std::vector<double> incr;
  double prev = 0.0;
  for (size_t m = 1; m <= n; m *= 2) {
    double mid = 0.5 * (est.lower_partial[m - 1] + est.upper_partial[m - 1]);
    if (m > 1) incr.push_back(mid - prev);
    prev = mid;
  }
  if (incr.size() >= 3) {
    double acc = 0.0;
    int cnt = 0;
    for (size_t j = std::max<size_t>(1, incr.size() - 3); j < incr.size(); ++j) {
      if (incr[j - 1] > 0.0) {
        acc += incr[j] / incr[j - 1];
        ++cnt;
      }
    }
    if (cnt > 0) {
      est.dyadic_ratio = acc / cnt;
      if (est.dyadic_ratio >= 0.8)
        est.heuristic = Verdict::Divergent;
      else if (est.dyadic_ratio <= 0.5)
        est.heuristic = Verdict::Convergent;
    }
  }
  return est;
}

double birth_death_hit_zero_prob(const std::function<double(long)>& p_up,
                                 long start, long frontier) {
  if (start <= 0) return 1.0;
  if (start >= frontier) return 0.0;
  long double pi = 1.0L, below = 0.0L, total = 0.0L;
  for (long j = 0; j < frontier; ++j) {
    if (j > 0) {
      double pu = p_up(j);
      if (pu <= 0.0 || pu >= 1.0)
        throw std::invalid_argument("birth_death_hit_zero_prob: p_up must be in (0,1)");
      pi *= static_cast<long double>(1.0 - pu) / pu;
    }
    total += pi;
    if (j < start) below += pi;
  }
  return static_cast<double>(1.0L - below / total);
}

ArsReport ars_check(
    const std::vector<std::pair<long, const std::unordered_set<Site, SiteHash>*>>&
        snapshots,
    int d) {
  ArsReport rep;
  const double e_threshold = std::exp(1.0);
  for (const auto& [t, dom_ptr] : snapshots) {
    const auto& dom = *dom_ptr;
    if (dom.empty()) throw std::invalid_argument("ars_check: empty snapshot");
    ArsSnapshot snap;
    snap.t = t;

    // Largest f with the f-ball contained in the snapshot: the nearest
    // complement site is always adjacent to the domain (or the origin).
    int64_t s_star_sq = std::numeric_limits<int64_t>::max();
    if (!dom.count(Site())) s_star_sq = 0;
    for (const Site& z : dom)
      for (int dir = 0; dir < 2 * d; ++dir) {
        Site n = neighbor(z, dir);
        if (!dom.count(n)) s_star_sq = std::min(s_star_sq, l2_sq(n, d));
      }
    snap.f = std::sqrt(static_cast<double>(s_star_sq));
    snap.applicable = snap.f >= e_threshold;

    if (snap.applicable) {
      // Multi-source BFS from the inscribed ball through the snapshot.
      std::unordered_map<Site, long, SiteHash> dist;
      std::deque<Site> queue;
      for (const Site& z : dom)
        if (l2_sq(z, d) < s_star_sq) {
          dist.emplace(z, 0);
          queue.push_back(z);
        }
      long worst = 0;
      while (!queue.empty()) {
        Site z = queue.front();
        queue.pop_front();
        long dz = dist[z];
        for (int dir = 0; dir < 2 * d; ++dir) {
          Site n = neighbor(z, dir);
          if (!dom.count(n)) continue;
          if (dist.emplace(n, dz + 1).second) {
            queue.push_back(n);
            worst = std::max(worst, dz + 1);
          }
        }
      }
      if (dist.size() < dom.size()) {
        snap.gamma = std::numeric_limits<double>::infinity();
      } else {
        snap.max_dist = worst;
        snap.gamma = static_cast<double>(worst) / std::log(snap.f);
      }
      rep.minimal_gamma = std::max(rep.minimal_gamma, snap.gamma);
    }
    rep.snapshots.push_back(snap);
  }
  return rep;
}

}  // namespace latgrow
