#pragma once
// Statistical engine: sample summaries, Welch's two-sample t-test with the
// Welch-Satterthwaite degrees of freedom, a permutation-test oracle, and
// the with/without-attack feasibility verdict.

#include <cstdint>
#include <span>
#include <vector>

#include "tccsim/trace.hpp"

namespace timestats {

struct Histogram {
  std::vector<double> edges;          // bins + 1 entries
  std::vector<std::uint64_t> counts;  // sums to n
};

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; defined for n >= 2, else 0
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  Histogram histogram;
};

// Shifted exact accumulation (128-bit integer sums of deviations from the
// first sample), so tick-scale magnitudes cannot cancel catastrophically.
// Throws std::invalid_argument on empty input.
SampleSummary summarize(std::span<const std::uint64_t> samples,
                        std::size_t bins = 20);

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;  // two-sided
  double alpha = 0.05;
  bool reject = false;  // reject <=> p_value < alpha
};

// Welch's unequal-variance t-test of the null "same mean". Degenerate
// inputs: both variances zero resolves to p=1 (equal means) or p=0
// (different means); a single zero variance flows through the general
// formula. Requires n >= 2 per group.
TTestResult welch_t_test(std::span<const std::uint64_t> a,
                         std::span<const std::uint64_t> b,
                         double alpha = 0.05);

// Label-permutation p-value of the |mean difference| statistic, the
// distribution-free oracle for welch_t_test. Group comparisons are exact
// integer arithmetic; the add-one convention keeps p in (0, 1].
double permutation_test(std::span<const std::uint64_t> a,
                        std::span<const std::uint64_t> b,
                        std::size_t iterations, std::uint64_t seed);

struct AttackVerdict {
  std::uint64_t config_digest = 0;
  std::vector<TTestResult> repetitions;
  bool feasible = false;      // all repetitions reject the null
  double mean_shift_ticks = 0.0;
  bool reproducible = false;  // all repetitions agree on reject vs not
};

// Pairs repetition i of with_attack against repetition i of without_attack.
// All traces must share one config digest and carry the matching attack
// flag; throws std::invalid_argument otherwise.
AttackVerdict assess(std::span<const simkernel::TimingTrace> with_attack,
                     std::span<const simkernel::TimingTrace> without_attack,
                     double alpha = 0.05);

// Regularized incomplete beta I_x(a, b) by the standard continued fraction
// (modified Lentz); tested to 1e-10 absolute against a high-precision
// oracle, typically ~1e-14 in practice.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided Student-t p-value via I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

}  // namespace timestats
