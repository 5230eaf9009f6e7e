#pragma once
// Observable outputs of a simulation run: the receiver's timing trace
// (time-between-switch-ins in counter ticks) and the event log.

#include <cstdint>
#include <vector>

#include "tccsim/sim_config.hpp"

namespace simkernel {

struct TraceMeta {
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  bool attack = false;
  std::int64_t counter_freq = 0;
  std::uint64_t start_offset_ticks = 0;  // counter at first receiver switch-in
};

struct TraceSample {
  std::int64_t frame_index = 0;  // major frame of the later switch-in
  std::uint64_t delta_ticks = 0;
};

struct TimingTrace {
  std::vector<TraceSample> samples;
  TraceMeta meta;

  std::vector<std::uint64_t> deltas() const;
  std::uint64_t digest() const;  // over samples + identity metadata
};

struct SwitchEvent {
  std::int64_t frame_index = 0;
  int outgoing_board = 0;
  int incoming_board = 0;
  std::int64_t actual_cost_ns = 0;     // clamp input, on the virtual clock
  std::int64_t perceived_cost_ns = 0;  // max(actual, enforced)
  std::uint64_t counter_at_switch_in = 0;
};

struct AuditEvent {
  std::int64_t frame_index = 0;
  int board_id = 0;
  HypercallKind kind = HypercallKind::vmmu_config;
};

struct EventLog {
  std::vector<SwitchEvent> switches;
  std::vector<AuditEvent> audits;  // capped; audit_count holds the total
  std::uint64_t audit_count = 0;
  std::uint64_t tick_interrupts = 0;
  std::uint64_t hypercalls_executed = 0;
  std::int64_t end_time_ns = 0;
  std::int64_t frames_completed = 0;
};

}  // namespace simkernel
