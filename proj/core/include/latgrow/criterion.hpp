#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace latgrow {

enum class Verdict { Divergent, Convergent, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Divergent: return "divergent";
    case Verdict::Convergent: return "convergent";
    default: return "undetermined";
  }
}

/// Boundary-visit schedule k -> N(k) >= 1. The built-in family is
/// N(k) = ceil(a * k^alpha); arbitrary schedules come in as tables.
struct Schedule {
  double a = 1.0;
  double alpha = 0.0;
  std::vector<long> table;  // 1-based via table[k-1]; empty = power family

  bool is_power_family() const { return table.empty(); }

  long N(long k) const {
    if (!table.empty()) {
      if (k < 1 || static_cast<size_t>(k) > table.size())
        throw std::out_of_range("Schedule: k outside table");
      return table[static_cast<size_t>(k - 1)];
    }
    double v = std::ceil(a * std::pow(static_cast<double>(k), alpha));
    return v < 1.0 ? 1 : static_cast<long>(v);
  }
};

/// Partial sums of a nonnegative criterion series plus a symbolic verdict.
/// Verdicts are issued only for recognized families; a numeric partial sum
/// never masquerades as a convergence proof.
struct CriterionReport {
  std::string id;
  std::vector<double> partial_sums;  // partial_sums[k-1] = sum up to k
  Verdict verdict = Verdict::Undetermined;

  double total() const { return partial_sums.empty() ? 0.0 : partial_sums.back(); }
};

/// Sum N(k) k^{1-d}: transience criterion for the expanding-sphere model.
/// Requires k_max >= 10.
CriterionReport egs_criterion(const Schedule& sched, int d, long k_max);

/// Sum N(k) k^{2-d} over box shells, d >= 3.
CriterionReport obt_box_criterion(const Schedule& sched, int d, long k_max);

}  // namespace latgrow
