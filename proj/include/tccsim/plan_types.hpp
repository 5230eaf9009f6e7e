#pragma once
// Experiment plan data model: the parameter grid and its expansion into
// concrete runs. Kept separate from the runner so config IO can depend on
// the types without pulling in execution machinery.

#include <cstdint>
#include <string>
#include <vector>

#include "tccsim/attack_plan.hpp"
#include "tccsim/sim_config.hpp"

namespace harness {

struct ExperimentPlan {
  std::vector<std::int64_t> switch_durations_ns = {1'000, 10'000, 10'000'000};
  std::vector<std::int64_t> tick_frequencies = {10, 1000};
  std::vector<int> benign_board_counts = {1, 50};
  std::vector<unsigned> speed_exponents = {0, 1, 2};
  int repetitions = 3;
  std::int64_t sim_duration_ns = 900'000'000'000;  // 15 virtual minutes
  std::uint64_t master_seed = 0x7cc51;
  attackchan::BurstSpec burst;
  // Template system; the grid replicates its benign board and applies the
  // point parameters on top.
  simkernel::SimConfig template_config;

  std::size_t grid_size() const {
    return switch_durations_ns.size() * tick_frequencies.size() *
           benign_board_counts.size() * speed_exponents.size();
  }
};

struct GridPoint {
  std::int64_t switch_duration_ns = 0;
  std::int64_t tick_frequency = 0;
  int benign_boards = 0;
  unsigned speed_exponent = 0;

  std::string key() const;  // stable file-name fragment
  bool operator==(const GridPoint&) const = default;
};

struct RunDescriptor {
  std::size_t grid_index = 0;
  GridPoint point;
  bool attack = false;
  int repetition = 0;
  std::uint64_t seed = 0;
  simkernel::SimConfig config;  // fully instantiated, seed applied
  std::string run_key;          // stable file-name fragment
};

}  // namespace harness
