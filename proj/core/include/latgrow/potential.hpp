#pragma once

#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "latgrow/criterion.hpp"
#include "latgrow/domain.hpp"
#include "latgrow/walker.hpp"

namespace latgrow {

/// Hitting-probability problem on the open-edge subgraph of a finite domain:
/// h = 1 on target, 0 on killing, discrete-harmonic elsewhere.
struct DirichletProblem {
  const GrowingDomain* domain = nullptr;
  std::vector<Site> target;
  std::vector<Site> killing;
  Site start;
};

enum class SolveMethod { Iterative, Dense };

struct DirichletField {
  std::unordered_map<Site, double, SiteHash> value;
  double residual_inf = 0.0;  // max over interior of |h - Ph|

  double at(const Site& z) const;
  double at_or(const Site& z, double fallback) const {
    auto it = value.find(z);
    return it == value.end() ? fallback : it->second;
  }
};

/// Solves the discrete Dirichlet problem on the component of `start`.
/// Iterative: conjugate gradient with long-double residual refinement.
/// Dense: Gaussian elimination with partial pivoting (< 5000 unknowns), kept
/// as the independent cross-check route.
/// Throws if start is disconnected from target+killing, or the sets overlap.
DirichletField solve_hit_probability(const DirichletProblem& p,
                                     SolveMethod method = SolveMethod::Iterative);

double hit_probability(const DirichletProblem& p,
                       SolveMethod method = SolveMethod::Iterative);

/// Exact first-exit distribution of SRW on Z^d from a finite site set:
/// for each exterior neighbor y of `dom`, the probability that the walk
/// started at `start` first leaves dom at y.
std::unordered_map<Site, double, SiteHash> exit_measure(
    const std::unordered_set<Site, SiteHash>& dom, int d, const Site& start,
    SolveMethod method = SolveMethod::Dense);

/// Upper bound c_d * |y|_1^{2-d} on the probability that SRW on Z^d, d >= 3,
/// ever hits the origin from y. The constant is calibrated against exact
/// solves (see ever_hit_constant); throws for d <= 2 or y = 0.
double ever_hit_zero_bound(const Site& y, int d);

/// The stored calibration constant for ever_hit_zero_bound.
double ever_hit_constant(int d);

/// Recomputes the constant from exact solves on a ball of the given radius
/// with absorbing-shell correction and a 1.25 safety factor. Used to audit
/// the stored value.
double calibrate_ever_hit_constant(int d, int radius = 30, int sample_max_l1 = 15);

/// Sum over initial boundary sites of sup over the local ball C(x) of the
/// ever-hit-origin probability. Near terms by exact solve on a large ball,
/// far terms by the analytic bound; reports a solve-only lower and a
/// bound-augmented upper partial sum. Requires d >= 3.
struct SStarReport {
  std::vector<double> lower_terms, upper_terms;
  std::vector<double> lower_partial, upper_partial;
  double lower_sum() const { return lower_partial.empty() ? 0 : lower_partial.back(); }
  double upper_sum() const { return upper_partial.empty() ? 0 : upper_partial.back(); }
};
SStarReport s_star(const GrowingDomain& domain0,
                   const std::function<long(const Site&)>& correction_radius,
                   int d, long truncation_radius, long solve_radius = 30,
                   SolveMethod method = SolveMethod::Iterative);

/// inf/sup hitting-probability brackets over the one-ring set C_k of the
/// radius-ck ball, for k in [k_min, k_max]: the recurrence series uses
/// inf P(hit 0 before the k-shell), the transience series sup P(hit 0
/// before the (k+1)-shell). Also reports the k^{d-1}-normalized values and,
/// for d = 2, the k log k lower-bound diagnostics.
struct EgsBracket {
  std::vector<long> ks;
  std::vector<double> inf_p, sup_p;
  std::vector<double> rec_partial, trans_partial;
  std::vector<double> norm_inf, norm_sup;  // k^{d-1} * P
  std::vector<double> d2_lower;            // k * log(k) * inf_p (d = 2 only)
};
EgsBracket egs_bracket(const std::function<long(long)>& N, int d, double c,
                       long k_min, long k_max,
                       SolveMethod method = SolveMethod::Iterative);

/// Running estimate of S = sum of per-record hit probabilities from a
/// stopping log. The oracle maps a record to a [lower, upper] bracket for
/// its term (equal when the snapshot was solved exactly).
using TermOracle = std::function<std::pair<double, double>(const StoppingRecord&)>;
struct SEstimate {
  std::vector<double> lower_terms, upper_terms;
  std::vector<double> lower_partial, upper_partial;
  Verdict heuristic = Verdict::Undetermined;
  double dyadic_ratio = 0.0;  // mean ratio of consecutive dyadic increments
};
SEstimate s_estimator(const StoppingLog& log, const TermOracle& term);

/// P(hit 0 before `frontier`) for a birth-death chain on Z_+ with up
/// probability p_up(k) at site k (holding steps do not matter).
double birth_death_hit_zero_prob(const std::function<double(long)>& p_up,
                                 long start, long frontier);

/// Almost-regular-shape audit for Euclidean-ball shapes: per snapshot the
/// inferred inscribed radius f, the worst in-domain distance to the inscribed
/// ball, and the implied gamma; snapshots with f < e are not applicable.
struct ArsSnapshot {
  long t = 0;
  double f = 0.0;
  long max_dist = 0;
  double gamma = 0.0;
  bool applicable = false;
};
struct ArsReport {
  std::vector<ArsSnapshot> snapshots;
  double minimal_gamma = 0.0;  // max over applicable snapshots
};
ArsReport ars_check(
    const std::vector<std::pair<long, const std::unordered_set<Site, SiteHash>*>>&
        snapshots,
    int d);

}  // namespace latgrow
