#pragma once
// Deterministic event-driven execution of the cyclic schedule. Identical
// (config, attack, seed) triples produce bit-identical traces: the clock is
// integer nanoseconds, jitter is drawn from an integer-only generator, and
// the counter is integer arithmetic on the clock.

#include <cstdint>

#include "tccsim/attack_plan.hpp"
#include "tccsim/sim_config.hpp"
#include "tccsim/trace.hpp"

namespace simkernel {

struct SimResult {
  TimingTrace trace;
  EventLog log;
};

// counters_only drops the per-switch event list (the counters and the
// trace are kept); bulk statistical runs over many hours of virtual time
// do not need a gigabyte of switch events.
enum class EventDetail { full, counters_only };

// Runs whole major frames until sim_duration is covered. attack may be
// nullptr for a baseline run; passing an attack requires sender and
// receiver boards (throws std::invalid_argument otherwise). Unauthorized
// hypercalls in the plan raise audit events and have no timing effect.
SimResult run_simulation(const ValidatedConfig& cfg,
                         const attackchan::AttackPlan* attack = nullptr,
                         EventDetail detail = EventDetail::full);

// Time-base counter model: ticks accrue with executed instructions, so a
// virtual nanosecond carries counter_freq / 2^N ticks.
constexpr std::uint64_t counter_ticks(std::int64_t virtual_ns,
                                      std::int64_t counter_freq,
                                      unsigned speed_exponent) {
  const auto t = static_cast<unsigned __int128>(virtual_ns) *
                 static_cast<unsigned __int128>(counter_freq);
  const auto div = static_cast<unsigned __int128>(1'000'000'000)
                   << speed_exponent;
  return static_cast<std::uint64_t>(t / div);
}

}  // namespace simkernel
