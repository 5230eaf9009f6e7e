#include "tccsim/plan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tccsim/config_io.hpp"
#include "tccsim/digest.hpp"
#include "tccsim/rng.hpp"
#include "tccsim/simulator.hpp"
#include "tccsim/trace_io.hpp"
#include "tccsim/version.hpp"

namespace harness {

using nlohmann::json;
using simkernel::SimConfig;
using simkernel::TimingTrace;
using tccsim::seed_mix;
using tccsim::to_hex16;

std::string GridPoint::key() const {
  std::ostringstream os;
  os << "sw" << cfgio::format_duration_ns(switch_duration_ns) << "_tick"
     << tick_frequency << "_b" << benign_boards << "_n" << speed_exponent;
  return os.str();
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, const GridPoint& p,
                              bool attack, int repetition) {
  std::uint64_t s = seed_mix(master_seed);
  s = seed_mix(s ^ static_cast<std::uint64_t>(p.switch_duration_ns));
  s = seed_mix(s ^ static_cast<std::uint64_t>(p.tick_frequency));
  s = seed_mix(s ^ static_cast<std::uint64_t>(p.benign_boards));
  s = seed_mix(s ^ static_cast<std::uint64_t>(p.speed_exponent));
  s = seed_mix(s ^ (attack ? 0x5eedull : 0x0ull));
  s = seed_mix(s ^ static_cast<std::uint64_t>(repetition));
  return s;
}

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Pulls the role exemplars out of the template system.
struct TemplateBoards {
  simkernel::VirtualBoardSpec benign;
  simkernel::VirtualBoardSpec sender;
  simkernel::VirtualBoardSpec receiver;
  std::optional<simkernel::VirtualBoardSpec> io;
};

TemplateBoards template_boards(const SimConfig& tpl) {
  TemplateBoards tb;
  bool have_benign = false, have_sender = false, have_receiver = false;
  for (const auto& b : tpl.boards) {
    switch (b.role) {
      case simkernel::BoardRole::benign:
        if (!have_benign) tb.benign = b;
        have_benign = true;
        break;
      case simkernel::BoardRole::sender:
        tb.sender = b;
        have_sender = true;
        break;
      case simkernel::BoardRole::receiver:
        tb.receiver = b;
        have_receiver = true;
        break;
      case simkernel::BoardRole::io:
        tb.io = b;
        break;
    }
  }
  if (!have_benign || !have_sender || !have_receiver) {
    throw std::invalid_argument(
        "plan template must contain benign, sender and receiver boards");
  }
  return tb;
}

SimConfig instantiate_point(const ExperimentPlan& plan, const GridPoint& p) {
  SimConfig cfg = plan.template_config;
  cfg.enforced_switch_duration_ns = p.switch_duration_ns;
  cfg.tick_frequency = p.tick_frequency;
  cfg.speed_exponent = p.speed_exponent;
  cfg.sim_duration_ns = plan.sim_duration_ns;

  const auto tb = template_boards(plan.template_config);
  cfg.boards.clear();
  int next_id = 0;
  for (int i = 0; i < p.benign_boards; ++i) {
    auto b = tb.benign;
    b.id = next_id++;
    cfg.boards.push_back(b);
  }
  auto sender = tb.sender;
  sender.id = next_id++;
  cfg.boards.push_back(sender);
  auto receiver = tb.receiver;
  receiver.id = next_id++;
  cfg.boards.push_back(receiver);
  if (tb.io) {
    auto io = *tb.io;
    io.id = next_id++;
    cfg.boards.push_back(io);
  }
  return cfg;
}

}  // namespace

std::vector<RunDescriptor> expand_plan(const ExperimentPlan& plan) {
  const auto durations = sorted_unique(plan.switch_durations_ns);
  const auto ticks = sorted_unique(plan.tick_frequencies);
  const auto benigns = sorted_unique(plan.benign_board_counts);
  const auto exponents = sorted_unique(plan.speed_exponents);
  if (durations.empty() || ticks.empty() || benigns.empty() ||
      exponents.empty()) {
    throw std::invalid_argument("expand_plan: empty parameter set");
  }
  if (plan.repetitions < 1) {
    throw std::invalid_argument("expand_plan: repetitions must be >= 1");
  }

  const std::size_t grid = durations.size() * ticks.size() * benigns.size() *
                           exponents.size();
  const std::size_t total =
      grid * 2 * static_cast<std::size_t>(plan.repetitions);
  if (total > 100'000) {
    throw std::invalid_argument("expand_plan: grid expands to " +
                                std::to_string(total) +
                                " runs, above the 100000 limit");
  }

  std::vector<RunDescriptor> runs;
  runs.reserve(total);
  std::size_t grid_index = 0;
  for (auto sw : durations) {
    for (auto tf : ticks) {
      for (auto nb : benigns) {
        for (auto se : exponents) {
          const GridPoint point{sw, tf, nb, se};
          for (bool attack : {false, true}) {
            for (int rep = 0; rep < plan.repetitions; ++rep) {
              RunDescriptor run;
              run.grid_index = grid_index;
              run.point = point;
              run.attack = attack;
              run.repetition = rep;
              run.seed = derive_run_seed(plan.master_seed, point, attack, rep);
              run.config = instantiate_point(plan, point);
              run.config.seed = run.seed;
              run.run_key = point.key() + (attack ? "_att" : "_base") + "_r" +
                            std::to_string(rep);
              runs.push_back(std::move(run));
            }
          }
          ++grid_index;
        }
      }
    }
  }
  return runs;
}

std::uint64_t plan_digest(const ExperimentPlan& plan) {
  return tccsim::fnv1a64(cfgio::serialize_plan(plan));
}

PlanResult run_plan(const ExperimentPlan& plan,
                    const std::filesystem::path& out_dir, int jobs) {
  namespace fs = std::filesystem;
  const auto runs = expand_plan(plan);
  fs::create_directories(out_dir / "traces");

  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }

  struct RunSlot {
    TimingTrace trace;
    bool ok = false;
    bool skipped = false;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<RunSlot> slots(runs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      const auto& run = runs[i];
      auto& slot = slots[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const fs::path csv = out_dir / "traces" / (run.run_key + ".csv");
        auto vres = simkernel::validate_config(run.config);
        if (!vres.ok()) {
          slot.error = vres.message();
          continue;
        }
        if (fs::exists(csv)) {
          auto existing = simkernel::read_trace_csv(csv);
          if (existing.meta.seed == run.seed &&
              existing.meta.attack == run.attack &&
              existing.meta.config_digest == vres.config->digest()) {
            slot.trace = std::move(existing);
            slot.ok = true;
            slot.skipped = true;
            continue;
          }
        }
        attackchan::AttackPlan stress =
            attackchan::AttackPlan::constant_stress(plan.burst);
        auto result = simkernel::run_simulation(
            *vres.config, run.attack ? &stress : nullptr,
            simkernel::EventDetail::counters_only);
        simkernel::write_trace_csv(result.trace, csv);
        slot.trace = std::move(result.trace);
        slot.ok = true;
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
      slot.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  PlanResult result;
  result.plan_digest = plan_digest(plan);
  result.toolkit_version = tccsim::kVersion;

  const std::size_t per_point = 2 * static_cast<std::size_t>(plan.repetitions);
  const std::size_t n_points = runs.size() / per_point;
  for (std::size_t g = 0; g < n_points; ++g) {
    GridOutcome outcome;
    outcome.point = runs[g * per_point].point;

    std::vector<TimingTrace> with, without;
    std::string error;
    double wall = 0.0;
    for (std::size_t i = g * per_point; i < (g + 1) * per_point; ++i) {
      const auto& run = runs[i];
      const auto& slot = slots[i];
      wall += slot.seconds;
      if (slot.ok) {
        result.skipped_runs += slot.skipped ? 1 : 0;
        result.executed_runs += slot.skipped ? 0 : 1;
        auto& bucket = run.attack ? with : without;
        bucket.push_back(slot.trace);
        auto& keys = run.attack ? outcome.with_keys : outcome.without_keys;
        keys.push_back(run.run_key);
        auto& digs =
            run.attack ? outcome.with_digests : outcome.without_digests;
        digs.push_back(to_hex16(slot.trace.digest()));
      } else if (error.empty()) {
        error = run.run_key + ": " + slot.error;
      }
    }
    outcome.wall_seconds = wall;
    if (!error.empty()) {
      outcome.error = error;
      result.partial = true;
    } else {
      outcome.config_digest = with.front().meta.config_digest;
      outcome.verdict = timestats::assess(with, without);
      outcome.min_p = 1.0;
      for (const auto& r : outcome.verdict.repetitions) {
        outcome.min_p = std::min(outcome.min_p, r.p_value);
      }
      outcome.complete = true;
    }
    result.outcomes.push_back(std::move(outcome));
  }

  write_plan_artifacts(result, plan, out_dir);
  return result;
}

namespace {

json outcome_to_json(const GridOutcome& o) {
  json j;
  j["switch_duration_ns"] = o.point.switch_duration_ns;
  j["tick_frequency"] = o.point.tick_frequency;
  j["benign_boards"] = o.point.benign_boards;
  j["speed_exponent"] = o.point.speed_exponent;
  j["key"] = o.point.key();
  j["complete"] = o.complete;
  j["wall_seconds"] = o.wall_seconds;
  if (!o.complete) {
    j["error"] = o.error;
    return j;
  }
  j["config_digest"] = to_hex16(o.config_digest);
  j["feasible"] = o.verdict.feasible;
  j["reproducible"] = o.verdict.reproducible;
  j["mean_shift_ticks"] = o.verdict.mean_shift_ticks;
  j["min_p"] = o.min_p;
  json reps = json::array();
  for (const auto& r : o.verdict.repetitions) {
    reps.push_back({{"t", r.t_statistic},
                    {"df", r.degrees_of_freedom},
                    {"p", r.p_value},
                    {"reject", r.reject}});
  }
  j["repetitions"] = reps;
  j["with_keys"] = o.with_keys;
  j["without_keys"] = o.without_keys;
  j["with_digests"] = o.with_digests;
  j["without_digests"] = o.without_digests;
  return j;
}

GridOutcome outcome_from_json(const json& j) {
  GridOutcome o;
  o.point.switch_duration_ns = j.at("switch_duration_ns").get<std::int64_t>();
  o.point.tick_frequency = j.at("tick_frequency").get<std::int64_t>();
  o.point.benign_boards = j.at("benign_boards").get<int>();
  o.point.speed_exponent = j.at("speed_exponent").get<unsigned>();
  o.complete = j.at("complete").get<bool>();
  o.wall_seconds = j.value("wall_seconds", 0.0);
  if (!o.complete) {
    o.error = j.value("error", "");
    return o;
  }
  o.config_digest = tccsim::parse_hex64(j.at("config_digest").get<std::string>());
  o.verdict.config_digest = o.config_digest;
  o.verdict.feasible = j.at("feasible").get<bool>();
  o.verdict.reproducible = j.at("reproducible").get<bool>();
  o.verdict.mean_shift_ticks = j.at("mean_shift_ticks").get<double>();
  o.min_p = j.at("min_p").get<double>();
  for (const auto& r : j.at("repetitions")) {
    timestats::TTestResult t;
    t.t_statistic = r.at("t").get<double>();
    t.degrees_of_freedom = r.at("df").get<double>();
    t.p_value = r.at("p").get<double>();
    t.reject = r.at("reject").get<bool>();
    o.verdict.repetitions.push_back(t);
  }
  o.with_keys = j.at("with_keys").get<std::vector<std::string>>();
  o.without_keys = j.at("without_keys").get<std::vector<std::string>>();
  o.with_digests = j.at("with_digests").get<std::vector<std::string>>();
  o.without_digests = j.at("without_digests").get<std::vector<std::string>>();
  return o;
}

}  // namespace

void write_plan_artifacts(const PlanResult& result, const ExperimentPlan& plan,
                          const std::filesystem::path& out_dir) {
  json manifest;
  manifest["toolkit_version"] = result.toolkit_version;
  manifest["plan_digest"] = to_hex16(result.plan_digest);
  manifest["partial"] = result.partial;
  manifest["executed_runs"] = result.executed_runs;
  manifest["skipped_runs"] = result.skipped_runs;
  manifest["plan_text"] = cfgio::serialize_plan(plan);
  json outs = json::array();
  for (const auto& o : result.outcomes) outs.push_back(outcome_to_json(o));
  manifest["outcomes"] = outs;
  cfgio::write_text_file(out_dir / "plan.json", manifest.dump(2) + "\n");

  std::ostringstream csv;
  csv << "switch_duration_ns,tick_frequency,benign_boards,speed_exponent,"
         "config_digest,feasible,reproducible,mean_shift_ticks,min_p,"
         "p_values,complete,error\n";
  for (const auto& o : result.outcomes) {
    csv << o.point.switch_duration_ns << ',' << o.point.tick_frequency << ','
        << o.point.benign_boards << ',' << o.point.speed_exponent << ',';
    if (o.complete) {
      csv << to_hex16(o.config_digest) << ','
          << (o.verdict.feasible ? "true" : "false") << ','
          << (o.verdict.reproducible ? "true" : "false") << ','
          << o.verdict.mean_shift_ticks << ',' << o.min_p << ',';
      for (std::size_t i = 0; i < o.verdict.repetitions.size(); ++i) {
        if (i) csv << ';';
        csv << o.verdict.repetitions[i].p_value;
      }
      csv << ",true,\n";
    } else {
      // keep the row parseable: strip the error text of delimiters
      std::string err = o.error;
      for (auto& ch : err) {
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
      }
      csv << ",,,,,,false," << err << "\n";
    }
  }
  cfgio::write_text_file(out_dir / "verdicts.csv", csv.str());
}

PlanResult load_plan_result(const std::filesystem::path& out_dir) {
  const auto text = cfgio::read_text_file(out_dir / "plan.json");
  const json manifest = json::parse(text);
  PlanResult result;
  result.toolkit_version = manifest.at("toolkit_version").get<std::string>();
  result.plan_digest =
      tccsim::parse_hex64(manifest.at("plan_digest").get<std::string>());
  result.partial = manifest.at("partial").get<bool>();
  result.executed_runs = manifest.at("executed_runs").get<int>();
  result.skipped_runs = manifest.at("skipped_runs").get<int>();
  for (const auto& o : manifest.at("outcomes")) {
    result.outcomes.push_back(outcome_from_json(o));
  }
  return result;
}

TimingTrace ingest_trace(const std::filesystem::path& path,
                         const IngestMeta& supplied) {
  const std::string text = cfgio::read_text_file(path);

  // CSV trace format?
  std::istringstream peek(text);
  std::string first_line;
  std::getline(peek, first_line);
  if (first_line == "frame_index,delta_ticks") {
    TimingTrace trace;
    const auto sidecar = simkernel::meta_path_for(path);
    if (std::filesystem::exists(sidecar)) {
      trace = simkernel::read_trace_csv(path);
    } else {
      trace.samples = simkernel::parse_trace_samples_csv(text, path.string());
      std::vector<std::string> missing;
      if (!supplied.counter_freq) missing.push_back("counter_freq");
      if (!supplied.attack) missing.push_back("attack");
      if (!missing.empty()) {
        std::string msg = "ingest: missing required metadata:";
        for (const auto& m : missing) msg += " " + m;
        throw std::invalid_argument(msg);
      }
      trace.meta.counter_freq = *supplied.counter_freq;
      trace.meta.attack = *supplied.attack;
      trace.meta.config_digest =
          supplied.config_digest.value_or(tccsim::fnv1a64(text));
      trace.meta.seed = supplied.seed.value_or(0);
    }
    if (supplied.counter_freq) trace.meta.counter_freq = *supplied.counter_freq;
    if (supplied.attack) trace.meta.attack = *supplied.attack;
    if (supplied.config_digest) trace.meta.config_digest = *supplied.config_digest;
    if (supplied.seed) trace.meta.seed = *supplied.seed;
    if (trace.samples.empty()) {
      throw std::invalid_argument("ingest: trace has no samples");
    }
    return trace;
  }

  // Raw timestamp list: one counter value per line.
  std::vector<std::string> missing;
  if (!supplied.counter_freq) missing.push_back("counter_freq");
  if (!supplied.attack) missing.push_back("attack");
  if (!missing.empty()) {
    std::string msg = "ingest: missing required metadata:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }

  TimingTrace trace;
  trace.meta.counter_freq = *supplied.counter_freq;
  trace.meta.attack = *supplied.attack;
  trace.meta.config_digest =
      supplied.config_digest.value_or(tccsim::fnv1a64(text));
  trace.meta.seed = supplied.seed.value_or(0);

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_prev = false;
  std::uint64_t prev = 0;
  std::int64_t index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream row(line);
    std::uint64_t ts = 0;
    std::string trailing;
    if (!(row >> ts)) {
      std::istringstream probe(line);
      std::string word;
      if (probe >> word) {
        throw std::invalid_argument(path.string() + ":" +
                                    std::to_string(line_no) +
                                    ": not a counter value: '" + word + "'");
      }
      continue;  // blank line
    }
    if (row >> trailing) {
      throw std::invalid_argument(path.string() + ":" +
                                  std::to_string(line_no) +
                                  ": trailing content after counter value");
    }
    if (have_prev) {
      if (ts <= prev) {
        throw std::invalid_argument(
            path.string() + ":" + std::to_string(line_no) +
            ": non-monotone timestamp (" + std::to_string(ts) + " after " +
            std::to_string(prev) + ")");
      }
      trace.samples.push_back({++index, ts - prev});
    } else {
      trace.meta.start_offset_ticks = ts;
      have_prev = true;
    }
    prev = ts;
  }
  if (trace.samples.empty()) {
    throw std::invalid_argument(path.string() +
                                ": need at least two timestamps");
  }
  return trace;
}

}  // namespace harness
