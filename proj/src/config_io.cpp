#include "tccsim/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cfgio {

using simkernel::BoardRole;
using simkernel::HypercallKind;
using simkernel::JitterKind;
using simkernel::SimConfig;
using simkernel::VirtualBoardSpec;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::int64_t parse_i64(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument(what + ": not an integer: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument(what + ": not an unsigned integer: '" + s +
                                "'");
  }
  return v;
}

double parse_f64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": not a number: '" + s + "'");
  }
}

std::string format_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Line {
  std::string section;  // "sim", "jitter", "hypercall vmmu_config", ...
  std::string key;
  std::string value;
  std::size_t line_no = 0;
};

std::vector<Line> parse_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    std::string line =
        trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 'key = value': '" + line + "'");
    }
    out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                   line_no});
  }
  return out;
}

[[noreturn]] void unknown_key(const std::string& where,
                              const std::string& key) {
  throw std::invalid_argument("unknown key '" + key + "' in " + where);
}

void set_sim_key(SimConfig& cfg, const std::string& key,
                 const std::string& value) {
  const std::string what = "sim." + key;
  if (key == "speed_exponent") {
    const auto v = parse_i64(value, what);
    if (v < 0) throw std::invalid_argument(what + ": must be >= 0");
    cfg.speed_exponent = static_cast<unsigned>(v);
  } else if (key == "counter_freq") {
    cfg.counter_freq = parse_i64(value, what);
  } else if (key == "tick_frequency") {
    cfg.tick_frequency = parse_i64(value, what);
  } else if (key == "enforced_switch_duration") {
    cfg.enforced_switch_duration_ns = parse_duration_ns(value);
  } else if (key == "base_switch_cost") {
    cfg.base_switch_cost_ns = parse_duration_ns(value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(value, what);
  } else if (key == "sim_duration") {
    cfg.sim_duration_ns = parse_duration_ns(value);
  } else {
    unknown_key("[sim]", key);
  }
}

void set_jitter_key(SimConfig& cfg, const std::string& key,
                    const std::string& value) {
  const std::string what = "jitter." + key;
  if (key == "kind") {
    if (value == "none") {
      cfg.jitter.kind = JitterKind::none;
    } else if (value == "uniform") {
      cfg.jitter.kind = JitterKind::uniform;
    } else if (value == "truncated_normal") {
      cfg.jitter.kind = JitterKind::truncated_normal;
    } else {
      throw std::invalid_argument(
          what + ": expected none|uniform|truncated_normal, got '" + value +
          "'");
    }
  } else if (key == "magnitude") {
    cfg.jitter.magnitude_ns = parse_duration_ns(value);
  } else if (key == "tail_probability") {
    cfg.jitter.tail_probability = parse_f64(value, what);
  } else if (key == "tail_magnitude") {
    cfg.jitter.tail_magnitude_ns = parse_duration_ns(value);
  } else {
    unknown_key("[jitter]", key);
  }
}

void set_hypercall_key(SimConfig& cfg, HypercallKind kind,
                       const std::string& key, const std::string& value) {
  auto& c = cfg.hypercalls.cost(kind);
  if (key == "base_cost") {
    c.base_cost_ns = parse_duration_ns(value);
  } else if (key == "cache_flush_penalty") {
    c.cache_flush_penalty_ns = parse_duration_ns(value);
  } else if (key == "critical_section") {
    c.critical_section_ns = parse_duration_ns(value);
  } else {
    unknown_key(std::string("[hypercall ") + to_string(kind) + "]", key);
  }
}

void set_board_key(VirtualBoardSpec& board, const std::string& key,
                   const std::string& value) {
  const std::string what = "board." + std::to_string(board.id) + "." + key;
  if (key == "role") {
    const auto role = simkernel::parse_board_role(value);
    if (!role) {
      throw std::invalid_argument(
          what + ": expected benign|sender|receiver|io, got '" + value + "'");
    }
    board.role = *role;
  } else if (key == "time_slice") {
    board.time_slice_ns = parse_duration_ns(value);
  } else if (key == "tse_offset") {
    board.tse_offset_ns = parse_duration_ns(value);
  } else if (key == "switch_duration_override") {
    board.switch_duration_override_ns = parse_duration_ns(value);
  } else if (key == "authorized_hypercalls") {
    board.authorized_hypercalls.clear();
    for (const auto& tok : split_ws(value)) {
      if (tok == "none") continue;
      const auto kind = simkernel::parse_hypercall_kind(tok);
      if (!kind) {
        throw std::invalid_argument(what + ": unknown hypercall '" + tok +
                                    "'");
      }
      board.authorized_hypercalls.insert(*kind);
    }
  } else {
    unknown_key("[board " + std::to_string(board.id) + "]", key);
  }
}

// Routes one parsed line into the config. board_slot maps board id ->
// position in cfg.boards; new board sections append in file order.
void apply_config_line(SimConfig& cfg, std::map<int, std::size_t>& board_slot,
                       bool& saw_board_section, const Line& line) {
  const auto head = split_ws(line.section);
  if (head.empty()) {
    throw std::invalid_argument("line " + std::to_string(line.line_no) +
                                ": key outside any [section]");
  }
  if (head[0] == "sim" && head.size() == 1) {
    set_sim_key(cfg, line.key, line.value);
  } else if (head[0] == "jitter" && head.size() == 1) {
    set_jitter_key(cfg, line.key, line.value);
  } else if (head[0] == "hypercall" && head.size() == 2) {
    const auto kind = simkernel::parse_hypercall_kind(head[1]);
    if (!kind) {
      throw std::invalid_argument("line " + std::to_string(line.line_no) +
                                  ": unknown hypercall kind '" + head[1] +
                                  "'");
    }
    set_hypercall_key(cfg, *kind, line.key, line.value);
  } else if (head[0] == "board" && head.size() == 2) {
    const int id =
        static_cast<int>(parse_i64(head[1], "board section id"));
    if (!saw_board_section) {
      // The file defines its own schedule; drop the default boards.
      cfg.boards.clear();
      board_slot.clear();
      saw_board_section = true;
    }
    auto it = board_slot.find(id);
    if (it == board_slot.end()) {
      VirtualBoardSpec b;
      b.id = id;
      cfg.boards.push_back(b);
      it = board_slot.emplace(id, cfg.boards.size() - 1).first;
    }
    set_board_key(cfg.boards[it->second], line.key, line.value);
  } else {
    throw std::invalid_argument("line " + std::to_string(line.line_no) +
                                ": unknown section [" + line.section + "]");
  }
}

}  // namespace

std::int64_t parse_duration_ns(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty duration");
  std::size_t i = 0;
  while (i < s.size() &&
         (std::isdigit(static_cast<unsigned char>(s[i])) ||
          (i == 0 && (s[i] == '-' || s[i] == '+')))) {
    ++i;
  }
  const std::string digits = s.substr(0, i);
  const std::string unit = trim(s.substr(i));
  const std::int64_t v = parse_i64(digits, "duration '" + s + "'");
  std::int64_t mult = 1;
  if (unit.empty() || unit == "ns") {
    mult = 1;
  } else if (unit == "us") {
    mult = 1'000;
  } else if (unit == "ms") {
    mult = 1'000'000;
  } else if (unit == "s") {
    mult = 1'000'000'000;
  } else if (unit == "min") {
    mult = 60'000'000'000;
  } else {
    throw std::invalid_argument("unknown duration unit '" + unit + "' in '" +
                                s + "'");
  }
  return v * mult;
}

std::string format_duration_ns(std::int64_t ns) {
  if (ns == 0) return "0";
  struct Unit {
    std::int64_t mult;
    const char* suffix;
  };
  static constexpr Unit units[] = {{60'000'000'000, "min"},
                                   {1'000'000'000, "s"},
                                   {1'000'000, "ms"},
                                   {1'000, "us"}};
  for (const auto& u : units) {
    if (ns % u.mult == 0) return std::to_string(ns / u.mult) + u.suffix;
  }
  return std::to_string(ns) + "ns";
}

SimConfig parse_sim_config(const std::string& text) {
  SimConfig cfg = simkernel::default_config();
  std::map<int, std::size_t> board_slot;
  bool saw_board_section = false;
  for (const auto& line : parse_lines(text)) {
    if (line.section == "plan") {
      throw std::invalid_argument(
          "this is an experiment plan file; expected a sim config");
    }
    apply_config_line(cfg, board_slot, saw_board_section, line);
  }
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(read_text_file(path));
}

std::string serialize_sim_config(const SimConfig& cfg, bool with_seed) {
  std::ostringstream os;
  os << "[sim]\n";
  os << "speed_exponent = " << cfg.speed_exponent << "\n";
  os << "counter_freq = " << cfg.counter_freq << "\n";
  os << "tick_frequency = " << cfg.tick_frequency << "\n";
  os << "enforced_switch_duration = "
     << format_duration_ns(cfg.enforced_switch_duration_ns) << "\n";
  os << "base_switch_cost = " << format_duration_ns(cfg.base_switch_cost_ns)
     << "\n";
  if (with_seed) os << "seed = " << cfg.seed << "\n";
  os << "sim_duration = " << format_duration_ns(cfg.sim_duration_ns) << "\n";

  os << "\n[jitter]\n";
  switch (cfg.jitter.kind) {
    case JitterKind::none: os << "kind = none\n"; break;
    case JitterKind::uniform: os << "kind = uniform\n"; break;
    case JitterKind::truncated_normal:
      os << "kind = truncated_normal\n";
      break;
  }
  os << "magnitude = " << format_duration_ns(cfg.jitter.magnitude_ns) << "\n";
  os << "tail_probability = " << format_f64(cfg.jitter.tail_probability)
     << "\n";
  os << "tail_magnitude = " << format_duration_ns(cfg.jitter.tail_magnitude_ns)
     << "\n";

  for (auto kind : simkernel::kAllHypercallKinds) {
    const auto& c = cfg.hypercalls.cost(kind);
    os << "\n[hypercall " << to_string(kind) << "]\n";
    os << "base_cost = " << format_duration_ns(c.base_cost_ns) << "\n";
    os << "cache_flush_penalty = "
       << format_duration_ns(c.cache_flush_penalty_ns) << "\n";
    os << "critical_section = " << format_duration_ns(c.critical_section_ns)
       << "\n";
  }

  for (const auto& b : cfg.boards) {
    os << "\n[board " << b.id << "]\n";
    os << "role = " << to_string(b.role) << "\n";
    os << "time_slice = " << format_duration_ns(b.time_slice_ns) << "\n";
    os << "tse_offset = " << format_duration_ns(b.tse_offset_ns) << "\n";
    if (b.switch_duration_override_ns > 0) {
      os << "switch_duration_override = "
         << format_duration_ns(b.switch_duration_override_ns) << "\n";
    }
    os << "authorized_hypercalls =";
    bool any = false;
    for (auto kind : simkernel::kAllHypercallKinds) {
      if (b.authorized_hypercalls.contains(kind)) {
        os << ' ' << to_string(kind);
        any = true;
      }
    }
    if (!any) os << " none";
    os << "\n";
  }
  return os.str();
}

void apply_override(SimConfig& cfg, const std::string& key,
                    const std::string& value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : key) {
    if (ch == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);

  if (parts.size() == 1) {
    set_sim_key(cfg, parts[0], value);  // bare key means [sim]
    return;
  }
  if (parts[0] == "sim" && parts.size() == 2) {
    set_sim_key(cfg, parts[1], value);
    return;
  }
  if (parts[0] == "jitter" && parts.size() == 2) {
    set_jitter_key(cfg, parts[1], value);
    return;
  }
  if (parts[0] == "hypercall" && parts.size() == 3) {
    const auto kind = simkernel::parse_hypercall_kind(parts[1]);
    if (!kind) {
      throw std::invalid_argument("unknown hypercall kind '" + parts[1] +
                                  "' in override '" + key + "'");
    }
    set_hypercall_key(cfg, *kind, parts[2], value);
    return;
  }
  if (parts[0] == "board" && parts.size() == 3) {
    const int id = static_cast<int>(parse_i64(parts[1], "board id"));
    for (auto& b : cfg.boards) {
      if (b.id == id) {
        set_board_key(b, parts[2], value);
        return;
      }
    }
    throw std::invalid_argument("no board with id " + parts[1] +
                                " in override '" + key + "'");
  }
  throw std::invalid_argument("unknown override key '" + key + "'");
}

void apply_override_expr(SimConfig& cfg, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must look like key=value: '" +
                                key_eq_value + "'");
  }
  apply_override(cfg, trim(key_eq_value.substr(0, eq)),
                 trim(key_eq_value.substr(eq + 1)));
}

harness::ExperimentPlan parse_plan(const std::string& text) {
  harness::ExperimentPlan plan;
  plan.template_config = simkernel::default_config();
  std::map<int, std::size_t> board_slot;
  bool saw_board_section = false;
  bool saw_plan_section = false;

  for (const auto& line : parse_lines(text)) {
    if (line.section != "plan") {
      apply_config_line(plan.template_config, board_slot, saw_board_section,
                        line);
      continue;
    }
    saw_plan_section = true;
    const std::string what = "plan." + line.key;
    if (line.key == "switch_durations") {
      plan.switch_durations_ns.clear();
      for (const auto& tok : split_ws(line.value))
        plan.switch_durations_ns.push_back(parse_duration_ns(tok));
    } else if (line.key == "tick_frequencies") {
      plan.tick_frequencies.clear();
      for (const auto& tok : split_ws(line.value))
        plan.tick_frequencies.push_back(parse_i64(tok, what));
    } else if (line.key == "benign_board_counts") {
      plan.benign_board_counts.clear();
      for (const auto& tok : split_ws(line.value))
        plan.benign_board_counts.push_back(
            static_cast<int>(parse_i64(tok, what)));
    } else if (line.key == "speed_exponents") {
      plan.speed_exponents.clear();
      for (const auto& tok : split_ws(line.value)) {
        const auto v = parse_i64(tok, what);
        if (v < 0) throw std::invalid_argument(what + ": must be >= 0");
        plan.speed_exponents.push_back(static_cast<unsigned>(v));
      }
    } else if (line.key == "repetitions") {
      plan.repetitions = static_cast<int>(parse_i64(line.value, what));
    } else if (line.key == "sim_duration") {
      plan.sim_duration_ns = parse_duration_ns(line.value);
    } else if (line.key == "master_seed") {
      plan.master_seed = parse_u64(line.value, what);
    } else if (line.key == "burst_kind") {
      const auto kind = simkernel::parse_hypercall_kind(line.value);
      if (!kind) {
        throw std::invalid_argument(what + ": unknown hypercall '" +
                                    line.value + "'");
      }
      plan.burst.kind = *kind;
    } else if (line.key == "burst_count") {
      plan.burst.count = static_cast<std::uint32_t>(parse_i64(line.value,
                                                              what));
    } else {
      unknown_key("[plan]", line.key);
    }
  }
  if (!saw_plan_section) {
    throw std::invalid_argument("plan file has no [plan] section");
  }
  return plan;
}

harness::ExperimentPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text_file(path));
}

std::string serialize_plan(const harness::ExperimentPlan& plan) {
  std::ostringstream os;
  os << "[plan]\nswitch_durations =";
  for (auto v : plan.switch_durations_ns) os << ' ' << format_duration_ns(v);
  os << "\ntick_frequencies =";
  for (auto v : plan.tick_frequencies) os << ' ' << v;
  os << "\nbenign_board_counts =";
  for (auto v : plan.benign_board_counts) os << ' ' << v;
  os << "\nspeed_exponents =";
  for (auto v : plan.speed_exponents) os << ' ' << v;
  os << "\nrepetitions = " << plan.repetitions;
  os << "\nsim_duration = " << format_duration_ns(plan.sim_duration_ns);
  os << "\nmaster_seed = " << plan.master_seed;
  os << "\nburst_kind = " << to_string(plan.burst.kind);
  os << "\nburst_count = " << plan.burst.count << "\n\n";
  os << serialize_sim_config(plan.template_config, false);
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("short write: " + path.string());
  }
}

}  // namespace cfgio
