#include "latgrow/criterion.hpp"

namespace latgrow {

namespace {

CriterionReport power_series_report(const std::string& id, const Schedule& sched,
                                    double exponent_shift, int d, long k_max) {
  CriterionReport rep;
  rep.id = id;
  rep.partial_sums.reserve(static_cast<size_t>(k_max));
  double sum = 0.0;
  for (long k = 1; k <= k_max; ++k) {
    sum += static_cast<double>(sched.N(k)) *
           std::pow(static_cast<double>(k), exponent_shift - d);
    rep.partial_sums.push_back(sum);
  }
  if (sched.is_power_family()) {
    double e = sched.alpha + exponent_shift - d;
    rep.verdict = (e >= -1.0) ? Verdict::Divergent : Verdict::Convergent;
  }
  return rep;
}

}  // namespace

CriterionReport egs_criterion(const Schedule& sched, int d, long k_max) {
  if (k_max < 10) throw std::invalid_argument("egs_criterion: k_max must be >= 10");
  CriterionReport rep = power_series_report("egs", sched, 1.0, d, k_max);
  // Any N(k) >= 1 dominates the harmonic series in d = 2.
  if (d == 2) rep.verdict = Verdict::Divergent;
  return rep;
}

CriterionReport obt_box_criterion(const Schedule& sched, int d, long k_max) {
  if (d < 3) throw std::invalid_argument("obt_box_criterion: requires d >= 3");
  return power_series_report("obt-box", sched, 2.0, d, k_max);
}

}  // namespace latgrow
