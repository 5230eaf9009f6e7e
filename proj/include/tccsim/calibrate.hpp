#pragma once
// Moment-matching calibration: fit base_switch_cost and the jitter
// magnitude of a template config so the simulated no-attack trace matches
// a reference trace's mean and variance.

#include <stdexcept>
#include <string>

#include "tccsim/sim_config.hpp"
#include "tccsim/trace.hpp"

namespace cli {

struct CalibrationFit {
  simkernel::SimConfig fitted;
  double reference_mean_ticks = 0.0;
  double reference_variance_ticks = 0.0;
  std::int64_t fitted_base_switch_cost_ns = 0;
  std::int64_t fitted_jitter_magnitude_ns = 0;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inverts the first two moments of the delta model:
//   mean_ns = S + n_b * 2^N * (base + magnitude/2)
//   var_ns^2 = 2^(2N) * n_b * ((u+1)^2 - 1),  u = magnitude/12
// (S = slice sum, n_b = switch count per frame). The fitted jitter is
// tail-free truncated_normal, or none for a constant reference. Throws
// CalibrationError with a diagnostic when the reference is unattainable:
// mean below the schedule floor, variance below the model floor, or an
// enforced duration that would clamp the fitted costs.
CalibrationFit fit_to_reference(const simkernel::TimingTrace& reference,
                                const simkernel::SimConfig& template_cfg);

}  // namespace cli
