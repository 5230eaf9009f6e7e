#pragma once
// The human-readable config format: "[section]" headers with "key = value"
// lines, '#'/';' comments, duration values with ns/us/ms/s/min suffixes.
// Sections: [sim], [jitter], [hypercall <kind>], [board <id>] (board order
// in the file is minor-frame order). The same format carries experiment
// plans ([plan] plus template sections).

#include <cstdint>
#include <filesystem>
#include <string>

#include "tccsim/plan_types.hpp"
#include "tccsim/sim_config.hpp"

namespace cfgio {

// "100ms" -> 100000000; bare integers are nanoseconds.
// Throws std::invalid_argument on malformed input.
std::int64_t parse_duration_ns(const std::string& text);
// Lossless shortest-suffix rendering: 100000000 -> "100ms".
std::string format_duration_ns(std::int64_t ns);

simkernel::SimConfig parse_sim_config(const std::string& text);
simkernel::SimConfig load_sim_config(const std::filesystem::path& path);

// Canonical serialization; parse(serialize(c)) == c. with_seed=false is the
// canonical form hashed by config_digest().
std::string serialize_sim_config(const simkernel::SimConfig& cfg,
                                 bool with_seed = true);

// Dotted-path override, e.g. "sim.speed_exponent=2",
// "board.0.time_slice=50ms", "hypercall.vmmu_config.base_cost=10us",
// "jitter.kind=none". A bare key ("seed=7") means the [sim] section.
// Unknown keys are hard errors (std::invalid_argument).
void apply_override(simkernel::SimConfig& cfg, const std::string& key,
                    const std::string& value);
void apply_override_expr(simkernel::SimConfig& cfg,
                         const std::string& key_eq_value);

harness::ExperimentPlan parse_plan(const std::string& text);
harness::ExperimentPlan load_plan(const std::filesystem::path& path);
std::string serialize_plan(const harness::ExperimentPlan& plan);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace cfgio
