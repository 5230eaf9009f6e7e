#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tccsim/attack.hpp"
#include "tccsim/simulator.hpp"
#include "tccsim/stats.hpp"

using namespace attackchan;
using simkernel::require_valid;
using simkernel::run_simulation;
using simkernel::TimingTrace;

namespace {

TimingTrace trace_of(std::vector<std::uint64_t> deltas) {
  TimingTrace t;
  t.meta.counter_freq = 1'000'000'000;
  std::int64_t i = 0;
  for (auto d : deltas) t.samples.push_back({++i, d});
  return t;
}

}  // namespace

TEST_CASE("message parsing") {
  CHECK(bits_to_string(parse_message_bits("0xDEADBEEF")) ==
        "11011110101011011011111011101111");
  CHECK(bits_to_string(parse_message_bits("0b1011")) == "1011");
  CHECK(bits_to_string(parse_message_bits("1010")) == "1010");
  CHECK_THROWS_AS((void)parse_message_bits("0xZZ"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_message_bits("10x1"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_message_bits(""), std::invalid_argument);
}

TEST_CASE("encode maps bits to burst/idle frames") {
  SUBCASE("direct mapping") {
    BitMessage m;
    m.bits = {1, 0, 1};
    m.frames_per_bit = 1;
    m.preamble_len = 0;
    const auto plan = encode(m);
    REQUIRE(plan.actions.size() == 3);
    CHECK(plan.actions[0].burst);
    CHECK_FALSE(plan.actions[1].burst);
    CHECK(plan.actions[2].burst);
  }
  SUBCASE("preamble alternates 1010") {
    BitMessage m;
    m.bits = {};
    m.frames_per_bit = 1;
    m.preamble_len = 4;
    const auto plan = encode(m);
    REQUIRE(plan.actions.size() == 4);
    CHECK(plan.actions[0].burst);
    CHECK_FALSE(plan.actions[1].burst);
    CHECK(plan.actions[2].burst);
    CHECK_FALSE(plan.actions[3].burst);
  }
  SUBCASE("repetition factor") {
    BitMessage m;
    m.bits = {1};
    m.frames_per_bit = 3;
    m.preamble_len = 0;
    const auto plan = encode(m);
    REQUIRE(plan.actions.size() == 3);
    for (const auto& a : plan.actions) CHECK(a.burst);
  }
  SUBCASE("plan length invariant") {
    BitMessage m;
    m.bits = {0, 1, 1, 0, 1};
    m.frames_per_bit = 4;
    m.preamble_len = 6;
    CHECK(encode(m).actions.size() == (6 + 5) * 4);
  }
  SUBCASE("zero-length plan is an error") {
    BitMessage m;
    m.frames_per_bit = 2;
    m.preamble_len = 0;
    CHECK_THROWS_AS((void)encode(m), std::invalid_argument);
  }
}

TEST_CASE("plan actions start at the second sender activation") {
  BitMessage m;
  m.bits = {1};
  m.frames_per_bit = 1;
  m.preamble_len = 0;
  const auto plan = encode(m);
  CHECK(plan.action_for(0) == nullptr);
  REQUIRE(plan.action_for(1) != nullptr);
  CHECK(plan.action_for(1)->burst);
  CHECK(plan.action_for(2) == nullptr);  // finite plan exhausted

  const auto stress = AttackPlan::constant_stress({});
  CHECK(stress.action_for(0) == nullptr);
  CHECK(stress.action_for(1) != nullptr);
  CHECK(stress.action_for(1000000) != nullptr);
}

TEST_CASE("calibrate_threshold midpoint and closed-channel detection") {
  SUBCASE("midpoint of the preamble clusters") {
    const auto t = trace_of({1000, 900, 1000, 900});
    const auto cal = calibrate_threshold(t, 4, 1);
    CHECK(cal.channel_open);
    CHECK(cal.threshold_ticks == doctest::Approx(950.0));
    CHECK(cal.preamble_one_mean == doctest::Approx(1000.0));
    CHECK(cal.preamble_zero_mean == doctest::Approx(900.0));
  }
  SUBCASE("equal means: channel closed") {
    const auto t = trace_of({900, 900, 900, 900});
    CHECK_FALSE(calibrate_threshold(t, 4, 1).channel_open);
  }
  SUBCASE("separation below the jitter floor: closed") {
    // one-cluster means barely above zero-cluster, noise dominating
    const auto t =
        trace_of({905, 895, 903, 899, 901, 897, 902, 900,
                  904, 896, 898, 902, 899, 903, 897, 901});
    CHECK_FALSE(calibrate_threshold(t, 16, 1).channel_open);
  }
  SUBCASE("trace must cover the preamble") {
    const auto t = trace_of({1000, 900});
    CHECK_THROWS_AS((void)calibrate_threshold(t, 4, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("decode thresholds and majority votes") {
  SUBCASE("threshold comparison") {
    const auto t = trace_of({1000, 900, 1000});
    const auto r = decode(t, 950.0, 1);
    CHECK(r.decoded_bits == std::vector<int>{1, 0, 1});
    CHECK_FALSE(r.partial);
    CHECK(r.per_bit_confidence[0] == doctest::Approx(50.0));
    CHECK(r.per_bit_confidence[1] == doctest::Approx(-50.0));
  }
  SUBCASE("majority vote beats one flipped frame") {
    const auto t = trace_of({1000, 1000, 900, 900, 900, 1000});
    const auto r = decode(t, 950.0, 3);
    CHECK(r.decoded_bits == std::vector<int>{1, 0});
  }
  SUBCASE("ber against ground truth") {
    const auto t = trace_of({1000, 900, 1000, 900});
    const std::vector<int> truth{1, 0, 0, 0};
    const auto r = decode(t, 950.0, 1, 0, &truth);
    REQUIRE(r.ber.has_value());
    CHECK(*r.ber == doctest::Approx(0.25));
  }
  SUBCASE("short trace flags partial decode") {
    const auto t = trace_of({1000, 900, 1000, 900, 1000});
    const std::vector<int> truth{1, 0, 1, 0, 1, 0};
    const auto r = decode(t, 950.0, 1, 0, &truth);
    CHECK(r.partial);
    CHECK(r.decoded_bits.size() == 5);
  }
}

TEST_CASE("round trip: decode(encode(m)) == m on an open channel") {
  auto cfg = testutil::exact_config();  // jitter-free
  cfg.enforced_switch_duration_ns = 1'000;  // open: p < b + d
  cfg.sim_duration_ns = 60'000'000'000;
  const auto vc = require_valid(cfg);

  tccsim::Xoshiro256ss rng(2024);
  for (int round = 0; round < 25; ++round) {
    BitMessage m;
    m.frames_per_bit = 1;
    m.preamble_len = 4;
    const std::size_t len = 8 + rng.bounded(24);
    for (std::size_t i = 0; i < len; ++i)
      m.bits.push_back(static_cast<int>(rng.bounded(2)));

    const auto plan = encode(m);
    const auto result = run_simulation(vc, &plan);
    const auto cal =
        calibrate_threshold(result.trace, m.preamble_len, m.frames_per_bit);
    REQUIRE(cal.channel_open);
    const auto dec = decode(result.trace, cal.threshold_ticks,
                            m.frames_per_bit, m.preamble_len, &m.bits);
    REQUIRE(dec.ber.has_value());
    CHECK(*dec.ber == 0.0);
    CHECK(std::equal(m.bits.begin(), m.bits.end(),
                     dec.decoded_bits.begin()));
  }
}

TEST_CASE("burst monotonicity: more calls never shrink the bit-1 delta") {
  // With the flush flag saturating, growing the burst is flat until it
  // spans the whole TSE window and the critical section starts extending
  // the switch; the mean must never decrease.
  auto cfg = testutil::exact_config();
  cfg.enforced_switch_duration_ns = 1'000;
  const auto vc = require_valid(cfg);

  double prev_mean = 0.0;
  for (std::uint32_t count : {1u, 10u, 50u, 150u, 250u, 400u}) {
    auto stress = AttackPlan::constant_stress(
        {simkernel::HypercallKind::vmmu_config, count});
    const auto result = run_simulation(vc, &stress);
    const auto s = timestats::summarize(result.trace.deltas(), 1);
    CHECK(s.mean >= prev_mean);
    prev_mean = s.mean;
  }

  // sanity: a window-spanning burst does engage the critical section
  auto small = AttackPlan::constant_stress(
      {simkernel::HypercallKind::vmmu_config, 50});
  auto spanning = AttackPlan::constant_stress(
      {simkernel::HypercallKind::vmmu_config, 400});
  const auto s_small =
      timestats::summarize(run_simulation(vc, &small).trace.deltas(), 1);
  const auto s_span =
      timestats::summarize(run_simulation(vc, &spanning).trace.deltas(), 1);
  CHECK(s_span.mean > s_small.mean);
}

TEST_CASE("closed channel decodes to coin flips") {
  auto cfg = simkernel::default_config();
  cfg.enforced_switch_duration_ns = simkernel::worst_case_switch_cost_ns(cfg);
  cfg.sim_duration_ns = 180'000'000'000;  // ~449 samples
  const auto vc = require_valid(cfg);

  tccsim::Xoshiro256ss rng(555);
  BitMessage m;
  m.frames_per_bit = 1;
  m.preamble_len = 0;
  for (int i = 0; i < 400; ++i)
    m.bits.push_back(static_cast<int>(rng.bounded(2)));
  const auto plan = encode(m);
  const auto result = run_simulation(vc, &plan);

  // threshold from the trace itself; the message cannot inform it
  const auto s = timestats::summarize(result.trace.deltas(), 1);
  const auto dec = decode(result.trace, s.mean, 1, 0, &m.bits);
  REQUIRE(dec.ber.has_value());
  CHECK(*dec.ber > 0.38);
  CHECK(*dec.ber < 0.62);
}
