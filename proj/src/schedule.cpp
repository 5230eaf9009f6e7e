#include "tccsim/schedule.hpp"

namespace simkernel {

Schedule build_schedule(const ValidatedConfig& cfg) {
  Schedule sched;
  const auto& boards = cfg.cfg().boards;
  std::int64_t at = 0;
  for (std::size_t i = 0; i < boards.size(); ++i) {
    MinorFrame f;
    f.board_id = boards[i].id;
    f.board_index = i;
    f.start_ns = at;
    f.end_ns = at + boards[i].time_slice_ns;
    sched.frames.push_back(f);
    at = f.end_ns + cfg.nominal_switch_ns(i);
  }
  sched.major_frame_ns = at;
  return sched;
}

}  // namespace simkernel
