#include "tccsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tccsim/rng.hpp"

namespace timestats {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

// Shifted exact sums: deviations from the first sample accumulate in
// 128-bit integers, so mean and variance come out of small differences
// instead of cancellations between huge squares.
struct Moments {
  std::size_t n = 0;
  std::uint64_t shift = 0;
  i128 sum_dev = 0;    // sum of (x - shift)
  i128 sum_dev2 = 0;   // sum of (x - shift)^2

  double mean() const {
    return static_cast<double>(shift) +
           static_cast<double>(sum_dev) / static_cast<double>(n);
  }
  double variance() const {  // unbiased
    if (n < 2) return 0.0;
    const long double s1 = static_cast<long double>(sum_dev);
    const long double s2 = static_cast<long double>(sum_dev2);
    const long double nn = static_cast<long double>(n);
    const long double v = (s2 - (s1 * s1) / nn) / (nn - 1.0L);
    return static_cast<double>(v < 0.0L ? 0.0L : v);
  }
};

Moments moments_of(std::span<const std::uint64_t> xs) {
  Moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  m.shift = xs.front();
  for (auto x : xs) {
    const i128 d = static_cast<i128>(x) - static_cast<i128>(m.shift);
    m.sum_dev += d;
    m.sum_dev2 += d * d;
  }
  return m;
}

}  // namespace

SampleSummary summarize(std::span<const std::uint64_t> samples,
                        std::size_t bins) {
  if (samples.empty()) {
    throw std::invalid_argument("summarize: empty sample");
  }
  if (bins == 0) bins = 1;

  SampleSummary s;
  const auto m = moments_of(samples);
  s.n = samples.size();
  s.mean = m.mean();
  s.variance = m.variance();
  s.min = *std::min_element(samples.begin(), samples.end());
  s.max = *std::max_element(samples.begin(), samples.end());

  if (s.min == s.max) {
    s.histogram.edges = {static_cast<double>(s.min),
                         static_cast<double>(s.min) + 1.0};
    s.histogram.counts = {samples.size()};
    return s;
  }
  const std::uint64_t range = s.max - s.min;
  s.histogram.counts.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i) {
    s.histogram.edges.push_back(static_cast<double>(s.min) +
                                static_cast<double>(range) *
                                    static_cast<double>(i) /
                                    static_cast<double>(bins));
  }
  for (auto x : samples) {
    // Integer bin index; the max lands in the last bin.
    auto idx = static_cast<std::size_t>(
        static_cast<u128>(x - s.min) * bins / range);
    if (idx >= bins) idx = bins - 1;
    ++s.histogram.counts[idx];
  }
  return s;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  // Continued fraction for the incomplete beta (modified Lentz). Converges
  // quickly for x < (a+1)/(a+b+2); otherwise evaluate the symmetric form.
  auto betacf = [](double aa, double bb, double xx) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = aa + bb;
    const double qap = aa + 1.0;
    const double qam = aa - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * xx / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
      const int m2 = 2 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + num * d;
      if (std::fabs(d) < kTiny) d = kTiny;
      c = 1.0 + num / c;
      if (std::fabs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + num * d;
      if (std::fabs(d) < kTiny) d = kTiny;
      c = 1.0 + num / c;
      if (std::fabs(c) < kTiny) c = kTiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
  };

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  if (df <= 0.0) return 1.0;
  const double x = df / (df + t * t);
  const double p = regularized_incomplete_beta(df / 2.0, 0.5, x);
  return std::clamp(p, 0.0, 1.0);
}

TTestResult welch_t_test(std::span<const std::uint64_t> a,
                         std::span<const std::uint64_t> b, double alpha) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t_test: need >= 2 samples per group");
  }
  TTestResult r;
  r.alpha = alpha;

  const auto ma = moments_of(a);
  const auto mb = moments_of(b);
  const double va = ma.variance();
  const double vb = mb.variance();

  if (va == 0.0 && vb == 0.0) {
    // Constant groups: equality is decidable exactly.
    if (a.front() == b.front()) {
      r.t_statistic = 0.0;
      r.degrees_of_freedom =
          static_cast<double>(a.size() + b.size() - 2);
      r.p_value = 1.0;
      r.reject = false;
    } else {
      const double diff = ma.mean() - mb.mean();
      r.t_statistic = diff > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      r.degrees_of_freedom =
          static_cast<double>(a.size() + b.size() - 2);
      r.p_value = 0.0;
      r.reject = true;
    }
    return r;
  }

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  r.t_statistic = (ma.mean() - mb.mean()) / std::sqrt(sa + sb);
  r.degrees_of_freedom = (sa + sb) * (sa + sb) /
                         (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.t_statistic, r.degrees_of_freedom);
  r.reject = r.p_value < alpha;
  return r;
}

double permutation_test(std::span<const std::uint64_t> a,
                        std::span<const std::uint64_t> b,
                        std::size_t iterations, std::uint64_t seed) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("permutation_test: empty group");
  }
  if (iterations < 1000) {
    throw std::invalid_argument("permutation_test: need >= 1000 iterations");
  }

  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  std::vector<std::uint64_t> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());

  // |mean_a - mean_b| >= obs compared exactly via cross-multiplied sums:
  // |sum_a * nb - sum_b * na| scaled once by na*nb.
  auto group_stat = [&](i128 sum_a, i128 sum_total) {
    const i128 sum_b = sum_total - sum_a;
    const i128 d = sum_a * static_cast<i128>(nb) -
                   sum_b * static_cast<i128>(na);
    return d < 0 ? -d : d;
  };

  i128 sum_total = 0;
  for (auto x : pool) sum_total += static_cast<i128>(x);
  i128 sum_a_obs = 0;
  for (auto x : a) sum_a_obs += static_cast<i128>(x);
  const i128 obs = group_stat(sum_a_obs, sum_total);

  tccsim::Xoshiro256ss rng(seed);
  std::size_t at_least = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    // Partial Fisher-Yates: the first na entries form the permuted group a.
    for (std::size_t i = 0; i < na; ++i) {
      const auto j = i + rng.bounded(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    i128 sum_a = 0;
    for (std::size_t i = 0; i < na; ++i) sum_a += static_cast<i128>(pool[i]);
    if (group_stat(sum_a, sum_total) >= obs) ++at_least;
  }
  return static_cast<double>(at_least + 1) /
         static_cast<double>(iterations + 1);
}

AttackVerdict assess(std::span<const simkernel::TimingTrace> with_attack,
                     std::span<const simkernel::TimingTrace> without_attack,
                     double alpha) {
  if (with_attack.empty() || with_attack.size() != without_attack.size()) {
    throw std::invalid_argument(
        "assess: need equal, nonzero repetition counts");
  }
  const std::uint64_t digest = with_attack.front().meta.config_digest;
  for (const auto& t : with_attack) {
    if (t.meta.config_digest != digest) {
      throw std::invalid_argument(
          "assess: config digest mismatch across with-attack traces");
    }
  }
  for (const auto& t : without_attack) {
    if (t.meta.config_digest != digest) {
      throw std::invalid_argument(
          "assess: config digest mismatch between trace sets; comparing "
          "unlike configurations is invalid");
    }
  }

  AttackVerdict v;
  v.config_digest = digest;
  double shift_sum = 0.0;
  std::size_t rejects = 0;
  for (std::size_t i = 0; i < with_attack.size(); ++i) {
    const auto da = with_attack[i].deltas();
    const auto db = without_attack[i].deltas();
    const auto r = welch_t_test(da, db, alpha);
    v.repetitions.push_back(r);
    if (r.reject) ++rejects;
    shift_sum += moments_of(da).mean() - moments_of(db).mean();
  }
  v.feasible = rejects == v.repetitions.size();
  v.reproducible = rejects == 0 || rejects == v.repetitions.size();
  v.mean_shift_ticks = shift_sum / static_cast<double>(v.repetitions.size());
  return v;
}

}  // namespace timestats
