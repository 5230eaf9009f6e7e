#include <doctest.h>

#include "helpers.hpp"
#include "tccsim/calibrate.hpp"
#include "tccsim/simulator.hpp"

using simkernel::default_config;
using simkernel::JitterKind;
using simkernel::require_valid;
using simkernel::run_simulation;
using simkernel::SimConfig;
using simkernel::TimingTrace;

namespace {

TimingTrace trace_with(std::vector<std::uint64_t> deltas,
                       std::int64_t counter_freq) {
  TimingTrace t;
  t.meta.counter_freq = counter_freq;
  std::int64_t i = 0;
  for (auto d : deltas) t.samples.push_back({++i, d});
  return t;
}

}  // namespace

TEST_CASE("constant reference fits base cost exactly, jitter to none") {
  auto truth = testutil::exact_config();
  truth.enforced_switch_duration_ns = 0;
  const auto reference = run_simulation(require_valid(truth)).trace;

  auto tpl = truth;
  tpl.base_switch_cost_ns = 0;
  const auto fit = cli::fit_to_reference(reference, tpl);
  CHECK(fit.fitted.jitter.kind == JitterKind::none);
  CHECK(fit.fitted_base_switch_cost_ns == truth.base_switch_cost_ns);
  CHECK(fit.fitted.counter_freq == reference.meta.counter_freq);
}

TEST_CASE("reference variance below the model floor is diagnosed") {
  // alternating +/- 1 tick around 600080030: implied jitter under 12 ns
  std::vector<std::uint64_t> deltas;
  for (int i = 0; i < 200; ++i)
    deltas.push_back(600'080'030 + (i % 2));
  const auto ref = trace_with(deltas, 1'500'000'000);
  auto tpl = default_config();
  tpl.enforced_switch_duration_ns = 0;
  try {
    (void)cli::fit_to_reference(ref, tpl);
    FAIL("expected CalibrationError");
  } catch (const cli::CalibrationError& e) {
    CHECK(std::string(e.what()).find("variance below model floor") !=
          std::string::npos);
  }
}

TEST_CASE("reference mean below the schedule floor is diagnosed") {
  // 100 ms worth of ticks per frame against a 400 ms schedule
  std::vector<std::uint64_t> deltas(100, 150'000'000);
  const auto ref = trace_with(deltas, 1'500'000'000);
  auto tpl = default_config();
  tpl.enforced_switch_duration_ns = 0;
  try {
    (void)cli::fit_to_reference(ref, tpl);
    FAIL("expected CalibrationError");
  } catch (const cli::CalibrationError& e) {
    CHECK(std::string(e.what()).find("schedule floor") != std::string::npos);
  }
}

TEST_CASE("template enforced duration clamping the fit is diagnosed") {
  auto truth = testutil::exact_config();
  truth.enforced_switch_duration_ns = 0;
  const auto reference = run_simulation(require_valid(truth)).trace;

  auto tpl = truth;
  tpl.base_switch_cost_ns = 0;
  tpl.enforced_switch_duration_ns = 500'000;  // above any sane fitted base
  CHECK_THROWS_AS((void)cli::fit_to_reference(reference, tpl),
                  cli::CalibrationError);
}

TEST_CASE("fit requires counter_freq metadata and enough samples") {
  auto tpl = default_config();
  const auto no_freq = trace_with({1, 2, 3}, 0);
  CHECK_THROWS_AS((void)cli::fit_to_reference(no_freq, tpl),
                  cli::CalibrationError);
  const auto too_short = trace_with({600'000'000}, 1'500'000'000);
  CHECK_THROWS_AS((void)cli::fit_to_reference(too_short, tpl),
                  cli::CalibrationError);
}
