#pragma once
// Domain model for one simulated separation-kernel system: virtual boards,
// the cyclic schedule parameters, the context-switch cost model, and the
// time-base counter. All durations are integer nanoseconds of virtual time.
//
// Speed scaling: speed_exponent N models a CPU that executes one
// instruction per 2^N ns. Instruction-class durations (base switch cost,
// hypercall base costs, jitter) stretch by 2^N on the virtual clock and the
// counter accrues cf/2^N ticks per virtual nanosecond, so instruction work
// always counts the same number of ticks regardless of N. Stall-class
// durations (cache-flush penalty, critical-section extension) are real-time
// microarchitectural effects: they advance the clock only at N=0, where the
// virtual clock is wall-time-coupled. An instruction-counted clock (N >= 1)
// cannot observe them. Slice durations and the enforced switch duration are
// scheduler wall-clock constants and never scale.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace simkernel {

enum class BoardRole { benign, sender, receiver, io };

enum class HypercallKind { vmmu_config, ipc_send, event_log, irq_config };

inline constexpr std::array<HypercallKind, 4> kAllHypercallKinds = {
    HypercallKind::vmmu_config, HypercallKind::ipc_send,
    HypercallKind::event_log, HypercallKind::irq_config};

const char* to_string(BoardRole role);
const char* to_string(HypercallKind kind);
std::optional<BoardRole> parse_board_role(const std::string& s);
std::optional<HypercallKind> parse_hypercall_kind(const std::string& s);

struct VirtualBoardSpec {
  int id = 0;
  BoardRole role = BoardRole::benign;
  std::int64_t time_slice_ns = 100'000'000;  // 100 ms
  std::int64_t tse_offset_ns = 1'000'000;    // TSE fires 1 ms before slice end
  // 0 means "use the global enforced_switch_duration". Applies to the switch
  // that ends this board's slice.
  std::int64_t switch_duration_override_ns = 0;
  std::set<HypercallKind> authorized_hypercalls;
};

struct HypercallCost {
  std::int64_t base_cost_ns = 0;           // instruction work per call
  std::int64_t cache_flush_penalty_ns = 0; // stall charged to the next switch
  std::int64_t critical_section_ns = 0;    // stall if in flight at slice end
};

struct HypercallModel {
  HypercallCost vmmu_config{5'000, 5'500, 4'000};
  HypercallCost ipc_send{800, 50, 300};
  HypercallCost event_log{500, 20, 200};
  HypercallCost irq_config{1'000, 100, 500};

  const HypercallCost& cost(HypercallKind kind) const;
  HypercallCost& cost(HypercallKind kind);
};

enum class JitterKind { none, uniform, truncated_normal };

// Ambient variability of the switch path. truncated_normal is a sum of 12
// integer uniforms on [0, magnitude/12]: bounded by magnitude, bell-shaped,
// and exactly reproducible. With probability tail_probability an extra
// uniform [0, tail_magnitude] outlier is added, mimicking the rare large
// samples seen on physical boards.
struct JitterModel {
  JitterKind kind = JitterKind::truncated_normal;
  std::int64_t magnitude_ns = 2'000;
  double tail_probability = 0.005;
  std::int64_t tail_magnitude_ns = 20'000;

  std::int64_t max_draw_ns() const {
    if (kind == JitterKind::none) return 0;
    return magnitude_ns + (tail_probability > 0.0 ? tail_magnitude_ns : 0);
  }
};

struct SimConfig {
  std::vector<VirtualBoardSpec> boards;  // order = minor-frame order
  unsigned speed_exponent = 0;           // N: one instruction per 2^N ns
  std::int64_t counter_freq = 1'500'000'000;  // time-base ticks per second
  std::int64_t tick_frequency = 10;  // virtual timer interrupts /s /board
  std::int64_t enforced_switch_duration_ns = 10'000;
  std::int64_t base_switch_cost_ns = 20'000;
  HypercallModel hypercalls;
  JitterModel jitter;
  std::uint64_t seed = 42;
  std::int64_t sim_duration_ns = 900'000'000'000;  // 15 virtual minutes
};

// The shipped calibration: the four-board reference system (benign, sender,
// receiver, io) with 100 ms slices on a 1.5 GHz counter.
SimConfig default_config();

// Instruction-class duration on the virtual clock at speed exponent n.
constexpr std::int64_t scaled_cost(std::int64_t ns, unsigned n) {
  return ns << n;
}

struct ValidationError {
  std::string field;
  std::string message;
};

struct ValidationResult;
ValidationResult validate_config(const SimConfig& cfg);

class ValidatedConfig {
 public:
  const SimConfig& cfg() const { return cfg_; }
  std::int64_t nominal_major_frame_ns() const { return nominal_major_ns_; }
  const std::vector<std::int64_t>& nominal_slice_starts_ns() const {
    return slice_starts_ns_;
  }
  // max(enforced-or-override, scaled base cost) for the switch that ends
  // board i's slice; the jitter-free steady-state switch length.
  std::int64_t nominal_switch_ns(std::size_t board_index) const;
  std::int64_t enforced_ns(std::size_t board_index) const;
  std::optional<std::size_t> sender_index() const { return sender_; }
  std::optional<std::size_t> receiver_index() const { return receiver_; }
  bool attack_capable() const {
    return sender_.has_value() && receiver_.has_value();
  }
  std::uint64_t digest() const { return digest_; }

 private:
  friend struct ValidationResult;
  friend ValidationResult validate_config(const SimConfig& cfg);

  SimConfig cfg_;
  std::int64_t nominal_major_ns_ = 0;
  std::vector<std::int64_t> slice_starts_ns_;
  std::optional<std::size_t> sender_;
  std::optional<std::size_t> receiver_;
  std::uint64_t digest_ = 0;
};

struct ValidationResult {
  std::vector<ValidationError> errors;
  std::optional<ValidatedConfig> config;

  bool ok() const { return errors.empty() && config.has_value(); }
  std::string message() const;  // all errors, one per line
};

ValidationResult validate_config(const SimConfig& cfg);

// Validate-or-throw convenience for call sites that already hold a config
// believed valid (tests, the harness grid builder).
ValidatedConfig require_valid(const SimConfig& cfg);

// Upper bound on a single switch's actual cost under any attack plan, on
// the virtual clock at the config's speed exponent. enforced >= this bound
// implies the clamp fully masks the attack.
std::int64_t worst_case_switch_cost_ns(const SimConfig& cfg);

// Digest over the canonical serialization with the seed omitted, so runs of
// the same system with different seeds or attack plans compare as "same
// configuration".
std::uint64_t config_digest(const SimConfig& cfg);

}  // namespace simkernel
