#include "tccsim/calibrate.hpp"

#include <cmath>

#include "tccsim/stats.hpp"

namespace cli {

using simkernel::JitterKind;
using simkernel::SimConfig;

CalibrationFit fit_to_reference(const simkernel::TimingTrace& reference,
                                const SimConfig& template_cfg) {
  if (reference.samples.size() < 2) {
    throw CalibrationError("calibrate: reference needs >= 2 samples");
  }
  if (reference.meta.counter_freq <= 0) {
    throw CalibrationError(
        "calibrate: reference metadata must carry counter_freq");
  }
  if (template_cfg.boards.empty()) {
    throw CalibrationError("calibrate: template has no boards");
  }

  const auto summary = timestats::summarize(reference.deltas(), 1);
  const double n_switches = static_cast<double>(template_cfg.boards.size());
  const double scale = std::pow(2.0, template_cfg.speed_exponent);
  // ticks per virtual ns
  const double k = static_cast<double>(reference.meta.counter_freq) /
                   (1e9 * scale);

  double slice_sum_ns = 0.0;
  for (const auto& b : template_cfg.boards) {
    slice_sum_ns += static_cast<double>(b.time_slice_ns);
  }

  // Invert the moments: var fixes the jitter magnitude, then the mean
  // fixes the base switch cost.
  const double var_ns2 = summary.variance / (k * k);
  const double per_switch_var = var_ns2 / (scale * scale * n_switches);
  // truncated_normal draw variance is (u+1)^2 - 1 with u = magnitude/12
  const double u = std::sqrt(per_switch_var + 1.0) - 1.0;
  std::int64_t magnitude_ns = static_cast<std::int64_t>(std::llround(u)) * 12;

  if (summary.variance > 0.0 && magnitude_ns <= 0) {
    throw CalibrationError(
        "calibrate: reference variance below model floor (implied jitter "
        "under 12 ns); the jitter model cannot reproduce it");
  }

  const double mean_ns = summary.mean / k;
  const double mean_jitter = static_cast<double>(magnitude_ns) / 2.0;
  const double base =
      (mean_ns - slice_sum_ns) / (n_switches * scale) - mean_jitter;
  const auto base_ns = static_cast<std::int64_t>(std::llround(base));
  if (base_ns < 0) {
    throw CalibrationError(
        "calibrate: reference mean below the schedule floor; the template "
        "slices alone exceed it, no base switch cost can fit");
  }

  CalibrationFit fit;
  fit.fitted = template_cfg;
  fit.fitted.counter_freq = reference.meta.counter_freq;
  fit.fitted.base_switch_cost_ns = base_ns;
  if (magnitude_ns > 0) {
    fit.fitted.jitter.kind = JitterKind::truncated_normal;
    fit.fitted.jitter.magnitude_ns = magnitude_ns;
  } else {
    fit.fitted.jitter.kind = JitterKind::none;
    fit.fitted.jitter.magnitude_ns = 0;
  }
  // The fit targets the first two moments; the outlier tail is not fitted.
  fit.fitted.jitter.tail_probability = 0.0;
  fit.fitted.jitter.tail_magnitude_ns = 0;
  fit.reference_mean_ticks = summary.mean;
  fit.reference_variance_ticks = summary.variance;
  fit.fitted_base_switch_cost_ns = base_ns;
  fit.fitted_jitter_magnitude_ns = fit.fitted.jitter.magnitude_ns;

  // The enforced duration must not clamp what we just fitted, or the
  // simulated moments will not match the reference.
  const auto scaled_base =
      simkernel::scaled_cost(base_ns, template_cfg.speed_exponent);
  for (std::size_t i = 0; i < fit.fitted.boards.size(); ++i) {
    const auto& b = fit.fitted.boards[i];
    const auto enforced = b.switch_duration_override_ns > 0
                              ? b.switch_duration_override_ns
                              : fit.fitted.enforced_switch_duration_ns;
    if (enforced > scaled_base) {
      throw CalibrationError(
          "calibrate: enforced switch duration " +
          std::to_string(enforced) + "ns would clamp the fitted base cost " +
          std::to_string(scaled_base) +
          "ns; lower it in the template before fitting");
    }
  }
  return fit;
}

}  // namespace cli
