#include "tccsim/sim_config.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tccsim/config_io.hpp"
#include "tccsim/digest.hpp"
#include "tccsim/simulator.hpp"

namespace simkernel {

const char* to_string(BoardRole role) {
  switch (role) {
    case BoardRole::benign: return "benign";
    case BoardRole::sender: return "sender";
    case BoardRole::receiver: return "receiver";
    case BoardRole::io: return "io";
  }
  return "?";
}

const char* to_string(HypercallKind kind) {
  switch (kind) {
    case HypercallKind::vmmu_config: return "vmmu_config";
    case HypercallKind::ipc_send: return "ipc_send";
    case HypercallKind::event_log: return "event_log";
    case HypercallKind::irq_config: return "irq_config";
  }
  return "?";
}

std::optional<BoardRole> parse_board_role(const std::string& s) {
  for (auto r : {BoardRole::benign, BoardRole::sender, BoardRole::receiver,
                 BoardRole::io}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<HypercallKind> parse_hypercall_kind(const std::string& s) {
  for (auto k : kAllHypercallKinds) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

const HypercallCost& HypercallModel::cost(HypercallKind kind) const {
  switch (kind) {
    case HypercallKind::vmmu_config: return vmmu_config;
    case HypercallKind::ipc_send: return ipc_send;
    case HypercallKind::event_log: return event_log;
    case HypercallKind::irq_config: return irq_config;
  }
  return vmmu_config;
}

HypercallCost& HypercallModel::cost(HypercallKind kind) {
  return const_cast<HypercallCost&>(
      static_cast<const HypercallModel*>(this)->cost(kind));
}

SimConfig default_config() {
  SimConfig cfg;  // cost model and jitter defaults live in the structs
  const std::set<HypercallKind> benign_calls = {HypercallKind::ipc_send,
                                                HypercallKind::event_log};
  const std::set<HypercallKind> all_calls = {
      HypercallKind::vmmu_config, HypercallKind::ipc_send,
      HypercallKind::event_log, HypercallKind::irq_config};
  cfg.boards = {
      {0, BoardRole::benign, 100'000'000, 1'000'000, 0, benign_calls},
      {1, BoardRole::sender, 100'000'000, 1'000'000, 0, all_calls},
      {2, BoardRole::receiver, 100'000'000, 1'000'000, 0, benign_calls},
      {3, BoardRole::io, 100'000'000, 1'000'000, 0, benign_calls},
  };
  return cfg;
}

std::int64_t ValidatedConfig::enforced_ns(std::size_t board_index) const {
  const auto& b = cfg_.boards.at(board_index);
  return b.switch_duration_override_ns > 0 ? b.switch_duration_override_ns
                                           : cfg_.enforced_switch_duration_ns;
}

std::int64_t ValidatedConfig::nominal_switch_ns(std::size_t board_index) const {
  return std::max(enforced_ns(board_index),
                  scaled_cost(cfg_.base_switch_cost_ns, cfg_.speed_exponent));
}

std::string ValidationResult::message() const {
  std::ostringstream os;
  for (const auto& e : errors) os << e.field << ": " << e.message << "\n";
  return os.str();
}

namespace {

void check_cost(std::vector<ValidationError>& errs, const std::string& field,
                std::int64_t value) {
  if (value < 0) errs.push_back({field, "must be >= 0"});
}

}  // namespace

ValidationResult validate_config(const SimConfig& cfg) {
  ValidationResult res;
  auto& errs = res.errors;

  if (cfg.boards.empty()) {
    errs.push_back({"boards", "schedule empty"});
    return res;
  }

  std::set<int> ids;
  std::size_t senders = 0, receivers = 0, ios = 0;
  for (std::size_t i = 0; i < cfg.boards.size(); ++i) {
    const auto& b = cfg.boards[i];
    const std::string field = "board." + std::to_string(b.id);
    if (!ids.insert(b.id).second)
      errs.push_back({field, "duplicate board id"});
    if (b.time_slice_ns <= 0)
      errs.push_back({field + ".time_slice", "must be > 0"});
    if (b.tse_offset_ns <= 0)
      errs.push_back({field + ".tse_offset", "must be > 0"});
    else if (b.tse_offset_ns >= b.time_slice_ns)
      errs.push_back({field + ".tse_offset",
                      "tse_offset must be < time_slice"});
    if (b.switch_duration_override_ns < 0)
      errs.push_back({field + ".switch_duration_override", "must be >= 0"});
    switch (b.role) {
      case BoardRole::sender: ++senders; break;
      case BoardRole::receiver: ++receivers; break;
      case BoardRole::io: ++ios; break;
      case BoardRole::benign: break;
    }
  }
  if (senders > 1) errs.push_back({"boards", "more than one sender board"});
  if (receivers > 1)
    errs.push_back({"boards", "more than one receiver board"});
  if (ios > 1) errs.push_back({"boards", "more than one io board"});

  if (cfg.counter_freq <= 0)
    errs.push_back({"sim.counter_freq", "must be > 0"});
  if (cfg.tick_frequency < 0)
    errs.push_back({"sim.tick_frequency", "must be >= 0"});
  if (cfg.speed_exponent > 16)
    errs.push_back({"sim.speed_exponent", "must be <= 16"});
  check_cost(errs, "sim.enforced_switch_duration",
             cfg.enforced_switch_duration_ns);
  check_cost(errs, "sim.base_switch_cost", cfg.base_switch_cost_ns);
  if (cfg.sim_duration_ns <= 0)
    errs.push_back({"sim.sim_duration", "must be > 0"});

  for (auto kind : kAllHypercallKinds) {
    const auto& c = cfg.hypercalls.cost(kind);
    const std::string field = std::string("hypercall.") + to_string(kind);
    check_cost(errs, field + ".base_cost", c.base_cost_ns);
    check_cost(errs, field + ".cache_flush_penalty", c.cache_flush_penalty_ns);
    check_cost(errs, field + ".critical_section", c.critical_section_ns);
  }
  {
    const auto& heavy = cfg.hypercalls.vmmu_config;
    const auto weight = heavy.cache_flush_penalty_ns +
                        heavy.critical_section_ns;
    for (auto kind : {HypercallKind::ipc_send, HypercallKind::event_log,
                      HypercallKind::irq_config}) {
      const auto& c = cfg.hypercalls.cost(kind);
      if (c.cache_flush_penalty_ns + c.critical_section_ns > weight) {
        errs.push_back({std::string("hypercall.") + to_string(kind),
                        "must not outweigh vmmu_config in cache_flush_penalty"
                        " + critical_section"});
      }
    }
  }

  check_cost(errs, "jitter.magnitude", cfg.jitter.magnitude_ns);
  check_cost(errs, "jitter.tail_magnitude", cfg.jitter.tail_magnitude_ns);
  if (cfg.jitter.tail_probability < 0.0 || cfg.jitter.tail_probability > 1.0)
    errs.push_back({"jitter.tail_probability", "must be in [0, 1]"});

  if (!errs.empty()) return res;

  ValidatedConfig vc;
  vc.cfg_ = cfg;
  std::int64_t at = 0;
  std::int64_t min_slice = cfg.boards.front().time_slice_ns;
  for (std::size_t i = 0; i < cfg.boards.size(); ++i) {
    vc.slice_starts_ns_.push_back(at);
    at += cfg.boards[i].time_slice_ns;
    at += vc.nominal_switch_ns(i);
    min_slice = std::min(min_slice, cfg.boards[i].time_slice_ns);
    if (cfg.boards[i].role == BoardRole::sender) vc.sender_ = i;
    if (cfg.boards[i].role == BoardRole::receiver) vc.receiver_ = i;
  }
  vc.nominal_major_ns_ = at;

  const auto frames = cfg.sim_duration_ns / vc.nominal_major_ns_;
  if (frames < 30) {
    errs.push_back(
        {"sim.sim_duration",
         "too short: covers " + std::to_string(frames) +
             " major frames, need >= 30 for meaningful statistics"});
  }
  if (counter_ticks(min_slice, cfg.counter_freq, cfg.speed_exponent) < 1) {
    errs.push_back({"sim.counter_freq",
                    "counter resolution too coarse: shortest slice spans"
                    " less than one tick"});
  }
  if (!errs.empty()) return res;

  vc.digest_ = config_digest(cfg);
  res.config = std::move(vc);
  return res;
}

ValidatedConfig require_valid(const SimConfig& cfg) {
  auto res = validate_config(cfg);
  if (!res.ok())
    throw std::invalid_argument("invalid config:\n" + res.message());
  return *std::move(res.config);
}

std::int64_t worst_case_switch_cost_ns(const SimConfig& cfg) {
  std::int64_t max_flush = 0;
  std::int64_t max_cs = 0;
  for (auto kind : kAllHypercallKinds) {
    const auto& c = cfg.hypercalls.cost(kind);
    max_flush = std::max(max_flush, c.cache_flush_penalty_ns);
    max_cs = std::max(max_cs, c.critical_section_ns);
  }
  // Stalls only reach the clock at N=0, but keep the bound valid at any N.
  return scaled_cost(cfg.base_switch_cost_ns + cfg.jitter.max_draw_ns(),
                     cfg.speed_exponent) +
         max_flush + max_cs;
}

std::uint64_t config_digest(const SimConfig& cfg) {
  return tccsim::fnv1a64(cfgio::serialize_sim_config(cfg, false));
}

}  // namespace simkernel
