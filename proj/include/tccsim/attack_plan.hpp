#pragma once
// The sender side of the channel: what the malicious board does in its
// Time-Slice-End handler at each of its activations.

#include <cstdint>
#include <vector>

#include "tccsim/sim_config.hpp"

namespace attackchan {

struct BurstSpec {
  simkernel::HypercallKind kind = simkernel::HypercallKind::vmmu_config;
  std::uint32_t count = 50;
};

struct AttackAction {
  bool burst = false;  // false = idle frame (bit 0)
  BurstSpec spec;
};

// Actions are applied starting at the sender's second activation
// (activation 1): the receiver's k-th delta sample then carries exactly
// action k, since one delta brackets one occurrence of every switch.
struct AttackPlan {
  std::vector<AttackAction> actions;
  bool cyclic = false;  // repeat the action list forever (constant stressing)

  // Action for the given sender activation, or nullptr for idle.
  const AttackAction* action_for(std::int64_t activation) const {
    if (activation < 1 || actions.empty()) return nullptr;
    const auto idx = static_cast<std::size_t>(activation - 1);
    if (idx < actions.size()) return &actions[idx];
    if (cyclic) return &actions[idx % actions.size()];
    return nullptr;
  }

  // Burst every frame; the plan the assessment harness runs.
  static AttackPlan constant_stress(BurstSpec spec) {
    AttackPlan plan;
    plan.actions.push_back({true, spec});
    plan.cyclic = true;
    return plan;
  }
};

}  // namespace attackchan
