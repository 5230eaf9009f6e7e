#pragma once
// Nominal cyclic schedule derived from a validated config: minor-frame
// boundaries inside one major frame, assuming steady-state switch lengths.

#include <cstdint>
#include <vector>

#include "tccsim/sim_config.hpp"

namespace simkernel {

struct MinorFrame {
  int board_id = 0;
  std::size_t board_index = 0;
  std::int64_t start_ns = 0;  // slice start, relative to major frame start
  std::int64_t end_ns = 0;    // slice end (switch begins here)
};

struct Schedule {
  std::vector<MinorFrame> frames;
  std::int64_t major_frame_ns = 0;
};

// Deterministic function of the config alone; board order is frame order.
Schedule build_schedule(const ValidatedConfig& cfg);

}  // namespace simkernel
