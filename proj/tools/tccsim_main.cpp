// tccsim: desk-scale simulator and assessment toolkit for timing covert
// channels in cyclically scheduled separation-kernel systems.
//
// Exit codes: 0 success, 2 validation/usage error, 1 runtime error.
// Feasibility verdicts are data (stdout/JSON), never exit codes.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tccsim/attack.hpp"
#include "tccsim/calibrate.hpp"
#include "tccsim/config_io.hpp"
#include "tccsim/digest.hpp"
#include "tccsim/plan.hpp"
#include "tccsim/simulator.hpp"
#include "tccsim/stats.hpp"
#include "tccsim/trace_io.hpp"
#include "tccsim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("TCCSIM_OUT_DIR")) return env;
  return ".";
}

simkernel::SimConfig load_config_with_overrides(
    const std::string& path, const std::vector<std::string>& sets,
    std::optional<std::uint64_t> seed) {
  auto cfg = cfgio::load_sim_config(path);
  for (const auto& kv : sets) cfgio::apply_override_expr(cfg, kv);
  if (seed) cfg.seed = *seed;
  return cfg;
}

simkernel::ValidatedConfig validate_or_fail(const simkernel::SimConfig& cfg) {
  auto res = simkernel::validate_config(cfg);
  if (!res.ok()) {
    throw ValidationFailure("config validation failed:\n" + res.message());
  }
  return *res.config;
}

std::vector<fs::path> collect_traces(const std::string& arg) {
  std::vector<fs::path> files;
  const fs::path p(arg);
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.path().extension() == ".csv" &&
          e.path().string().find(".meta.") == std::string::npos) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(p);
  }
  if (files.empty()) {
    throw ValidationFailure("no trace CSV files under: " + arg);
  }
  return files;
}

json ttest_json(const timestats::TTestResult& r) {
  return {{"t", r.t_statistic},
          {"df", r.degrees_of_freedom},
          {"p", r.p_value},
          {"alpha", r.alpha},
          {"reject", r.reject}};
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            const std::string& message, bool attack_flag,
            std::uint32_t burst_count, const std::string& burst_kind,
            const std::vector<std::string>& sets,
            std::optional<std::uint64_t> seed, bool quiet) {
  const auto cfg = load_config_with_overrides(config_path, sets, seed);
  const auto vcfg = validate_or_fail(cfg);
  const fs::path out = default_out_dir(out_flag);
  fs::create_directories(out);

  attackchan::BurstSpec burst;
  burst.count = burst_count;
  if (const auto kind = simkernel::parse_hypercall_kind(burst_kind)) {
    burst.kind = *kind;
  } else {
    throw ValidationFailure("unknown burst kind: " + burst_kind);
  }

  std::optional<attackchan::AttackPlan> plan;
  std::vector<int> message_bits;
  attackchan::BitMessage bit_message;
  if (!message.empty()) {
    message_bits = attackchan::parse_message_bits(message);
    bit_message.bits = message_bits;
    plan = attackchan::encode(bit_message, burst);
  } else if (attack_flag) {
    plan = attackchan::AttackPlan::constant_stress(burst);
  }

  const auto result =
      simkernel::run_simulation(vcfg, plan ? &*plan : nullptr);
  const fs::path trace_path = out / "trace.csv";
  simkernel::write_trace_csv(result.trace, trace_path);

  if (!message.empty()) {
    json gt;
    gt["message"] = attackchan::bits_to_string(message_bits);
    gt["frames_per_bit"] = bit_message.frames_per_bit;
    gt["preamble_len"] = bit_message.preamble_len;
    gt["burst_kind"] = to_string(burst.kind);
    gt["burst_count"] = burst.count;
    cfgio::write_text_file(out / "ground_truth.json", gt.dump(2) + "\n");
  }

  if (!quiet) {
    std::cout << "wrote " << trace_path.string() << " ("
              << result.trace.samples.size() << " samples, digest "
              << tccsim::to_hex16(result.trace.digest()) << ")\n";
    if (result.log.audit_count > 0) {
      std::cout << "audit events: " << result.log.audit_count
                << " (unauthorized hypercalls had no timing effect)\n";
    }
  }
  return kExitOk;
}

int cmd_plan(const std::string& plan_path, const std::string& out_flag,
             int jobs, const std::vector<std::string>& sets, bool quiet) {
  auto plan = cfgio::load_plan(plan_path);
  for (const auto& kv : sets) {
    cfgio::apply_override_expr(plan.template_config, kv);
  }
  const fs::path out = default_out_dir(out_flag);
  fs::create_directories(out);

  const auto result = harness::run_plan(plan, out, jobs);
  harness::write_report(result, plan, out);

  if (!quiet) {
    std::size_t feasible = 0;
    for (const auto& o : result.outcomes) {
      if (o.complete && o.verdict.feasible) ++feasible;
    }
    std::cout << "plan " << tccsim::to_hex16(result.plan_digest) << ": "
              << result.outcomes.size() << " grid points, "
              << result.executed_runs << " runs executed, "
              << result.skipped_runs << " resumed, " << feasible
              << " feasible point(s)\n"
              << "report: " << (out / "report.md").string() << "\n";
    if (result.partial) {
      std::cout << "warning: plan is partial; rerun to resume failed "
                   "points\n";
    }
  }
  return kExitOk;
}

int cmd_assess(const std::string& with_arg, const std::string& without_arg,
               double alpha, const std::string& out_file,
               const std::string& format) {
  std::vector<simkernel::TimingTrace> with, without;
  for (const auto& f : collect_traces(with_arg)) {
    with.push_back(simkernel::read_trace_csv(f));
  }
  for (const auto& f : collect_traces(without_arg)) {
    without.push_back(simkernel::read_trace_csv(f));
  }
  timestats::AttackVerdict verdict;
  try {
    verdict = timestats::assess(with, without, alpha);
  } catch (const std::invalid_argument& e) {
    throw ValidationFailure(e.what());
  }

  json j;
  j["config_digest"] = tccsim::to_hex16(verdict.config_digest);
  j["alpha"] = alpha;
  j["feasible"] = verdict.feasible;
  j["reproducible"] = verdict.reproducible;
  j["mean_shift_ticks"] = verdict.mean_shift_ticks;
  json reps = json::array();
  for (const auto& r : verdict.repetitions) reps.push_back(ttest_json(r));
  j["repetitions"] = reps;

  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else if (format == "csv") {
    std::cout << "config_digest,feasible,reproducible,mean_shift_ticks,"
                 "p_values\n"
              << tccsim::to_hex16(verdict.config_digest) << ','
              << (verdict.feasible ? "true" : "false") << ','
              << (verdict.reproducible ? "true" : "false") << ','
              << verdict.mean_shift_ticks << ',';
    for (std::size_t i = 0; i < verdict.repetitions.size(); ++i) {
      if (i) std::cout << ';';
      std::cout << verdict.repetitions[i].p_value;
    }
    std::cout << "\n";
  } else {
    std::cout << "config digest:  " << tccsim::to_hex16(verdict.config_digest)
              << "\n"
              << "feasible:       " << (verdict.feasible ? "yes" : "no")
              << "\n"
              << "reproducible:   " << (verdict.reproducible ? "yes" : "no")
              << "\n"
              << "mean shift:     " << verdict.mean_shift_ticks << " ticks\n";
    for (std::size_t i = 0; i < verdict.repetitions.size(); ++i) {
      const auto& r = verdict.repetitions[i];
      std::cout << "repetition " << i << ":   t=" << r.t_statistic
                << " df=" << r.degrees_of_freedom << " p=" << r.p_value
                << (r.reject ? " (reject)" : " (fail to reject)") << "\n";
    }
  }
  if (!out_file.empty()) {
    cfgio::write_text_file(out_file, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_decode(const std::string& trace_path, double threshold,
               bool have_threshold, std::size_t preamble_len,
               std::size_t frames_per_bit, const std::string& truth,
               const std::string& out_file, const std::string& format) {
  const auto trace = simkernel::read_trace_csv(trace_path);

  double thr = threshold;
  if (!have_threshold) {
    const auto cal =
        attackchan::calibrate_threshold(trace, preamble_len, frames_per_bit);
    if (!cal.channel_open) {
      std::cerr << "channel closed at calibration: preamble means "
                << cal.preamble_one_mean << " vs " << cal.preamble_zero_mean
                << " are indistinguishable\n";
      return kExitRuntime;
    }
    thr = cal.threshold_ticks;
  }

  std::vector<int> truth_bits;
  const std::vector<int>* truth_ptr = nullptr;
  if (!truth.empty()) {
    truth_bits = attackchan::parse_message_bits(truth);
    truth_ptr = &truth_bits;
  }
  const auto res =
      attackchan::decode(trace, thr, frames_per_bit, preamble_len, truth_ptr);

  json j;
  j["decoded_bits"] = attackchan::bits_to_string(res.decoded_bits);
  j["threshold_ticks"] = res.threshold_ticks;
  j["partial"] = res.partial;
  if (res.ber) j["ber"] = *res.ber;
  j["per_bit_confidence"] = res.per_bit_confidence;

  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "threshold: " << thr << " ticks\n"
              << "bits:      " << attackchan::bits_to_string(res.decoded_bits)
              << "\n";
    if (res.ber) std::cout << "ber:       " << *res.ber << "\n";
    if (res.partial) std::cout << "partial decode (trace too short)\n";
  }
  if (!out_file.empty()) {
    cfgio::write_text_file(out_file, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_ingest(const std::string& input, const std::string& out_file,
               std::optional<std::int64_t> counter_freq,
               std::optional<bool> attack, const std::string& digest,
               std::optional<std::uint64_t> seed, bool quiet) {
  harness::IngestMeta meta;
  meta.counter_freq = counter_freq;
  meta.attack = attack;
  meta.seed = seed;
  if (!digest.empty()) meta.config_digest = tccsim::parse_hex64(digest);

  simkernel::TimingTrace trace;
  try {
    trace = harness::ingest_trace(input, meta);
  } catch (const std::invalid_argument& e) {
    throw ValidationFailure(e.what());
  }
  simkernel::write_trace_csv(trace, out_file);
  if (!quiet) {
    std::cout << "ingested " << trace.samples.size() << " samples -> "
              << out_file << " (digest " << tccsim::to_hex16(trace.digest())
              << ")\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& plan_dir, bool quiet) {
  const auto result = harness::load_plan_result(plan_dir);
  const auto manifest =
      json::parse(cfgio::read_text_file(fs::path(plan_dir) / "plan.json"));
  const auto plan = cfgio::parse_plan(manifest.at("plan_text").get<std::string>());
  harness::write_report(result, plan, plan_dir);
  if (!quiet) {
    std::cout << "report: " << (fs::path(plan_dir) / "report.md").string()
              << "\n";
  }
  return kExitOk;
}

int cmd_calibrate(const std::string& reference_path,
                  const std::string& config_path, const std::string& out_file,
                  const std::vector<std::string>& sets, bool quiet) {
  const auto reference = simkernel::read_trace_csv(reference_path);
  auto tpl = cfgio::load_sim_config(config_path);
  for (const auto& kv : sets) cfgio::apply_override_expr(tpl, kv);

  cli::CalibrationFit fit;
  try {
    fit = cli::fit_to_reference(reference, tpl);
  } catch (const cli::CalibrationError& e) {
    throw ValidationFailure(e.what());
  }
  validate_or_fail(fit.fitted);

  const std::string text = cfgio::serialize_sim_config(fit.fitted);
  if (out_file.empty()) {
    std::cout << text;
  } else {
    cfgio::write_text_file(out_file, text);
    if (!quiet) {
      std::cout << "fitted base_switch_cost = "
                << cfgio::format_duration_ns(fit.fitted_base_switch_cost_ns)
                << ", jitter magnitude = "
                << cfgio::format_duration_ns(fit.fitted_jitter_magnitude_ns)
                << " -> " << out_file << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timing covert channel simulator and assessment toolkit"};
  app.set_version_flag("--version", std::string(tccsim::kVersion));
  app.require_subcommand(1);

  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  // run
  auto* run = app.add_subcommand("run", "simulate one configuration");
  std::string run_config, run_out, run_message, run_burst_kind = "vmmu_config";
  bool run_attack = false;
  std::uint32_t run_burst_count = 50;
  std::vector<std::string> run_sets;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", run_config, "sim config file")->required();
  run->add_option("--out", run_out, "output directory ($TCCSIM_OUT_DIR)");
  run->add_option("--message", run_message,
                  "bit message to transmit (0x.., 0b.., or raw bits)");
  run->add_flag("--attack", run_attack,
                "constant hypercall stressing (no message framing)");
  run->add_option("--burst-count", run_burst_count, "hypercalls per burst");
  run->add_option("--burst-kind", run_burst_kind, "hypercall kind to burst");
  run->add_option("--set", run_sets, "config override key=value");
  run->add_option("--seed", run_seed, "override the config seed");

  // plan
  auto* plan = app.add_subcommand("plan", "run an experiment plan grid");
  std::string plan_path, plan_out;
  int plan_jobs = 0;
  std::vector<std::string> plan_sets;
  plan->add_option("--config", plan_path, "plan file")->required();
  plan->add_option("--out", plan_out, "output directory ($TCCSIM_OUT_DIR)");
  plan->add_option("--jobs", plan_jobs, "worker threads (default: cores)");
  plan->add_option("--set", plan_sets, "template override key=value");

  // assess
  auto* assess = app.add_subcommand(
      "assess", "hypothesis-test with-attack vs without-attack traces");
  std::string assess_with, assess_without, assess_out, assess_format = "text";
  double assess_alpha = 0.05;
  assess->add_option("--with", assess_with, "trace file or directory")
      ->required();
  assess->add_option("--without", assess_without, "trace file or directory")
      ->required();
  assess->add_option("--alpha", assess_alpha, "significance level");
  assess->add_option("--out", assess_out, "write verdict JSON here");
  assess->add_option("--format", assess_format, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  // decode
  auto* decode = app.add_subcommand("decode", "recover bits from a trace");
  std::string decode_trace, decode_truth, decode_out, decode_format = "text";
  double decode_threshold = 0.0;
  std::size_t decode_preamble = 8, decode_fpb = 3;
  decode->add_option("--trace", decode_trace, "trace CSV")->required();
  auto* thr_opt = decode->add_option("--threshold", decode_threshold,
                                     "decision threshold in ticks");
  decode->add_option("--preamble-len", decode_preamble,
                     "training bits prepended by the sender");
  decode->add_option("--fpb", decode_fpb, "frames per bit");
  decode->add_option("--truth", decode_truth, "ground-truth message");
  decode->add_option("--out", decode_out, "write decode JSON here");
  decode->add_option("--format", decode_format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "normalize an external trace (CSV or raw timestamps)");
  std::string ingest_input, ingest_out, ingest_digest;
  std::optional<std::int64_t> ingest_freq;
  std::optional<bool> ingest_attack;
  std::optional<std::uint64_t> ingest_seed;
  ingest->add_option("--input", ingest_input, "input file")->required();
  ingest->add_option("--out", ingest_out, "output trace CSV")->required();
  ingest->add_option("--counter-freq", ingest_freq, "counter ticks/s");
  ingest->add_option("--attack", ingest_attack, "trace taken under attack");
  ingest->add_option("--digest", ingest_digest, "config digest label (hex)");
  ingest->add_option("--seed", ingest_seed, "seed metadata");

  // report
  auto* report = app.add_subcommand("report", "regenerate a plan report");
  std::string report_dir;
  report->add_option("--plan", report_dir, "plan output directory")
      ->required();

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "fit cost model to a reference trace");
  std::string cal_ref, cal_config, cal_out;
  std::vector<std::string> cal_sets;
  calibrate->add_option("--reference", cal_ref, "reference trace CSV")
      ->required();
  calibrate->add_option("--config", cal_config, "template config")
      ->required();
  calibrate->add_option("--out", cal_out, "write fitted config here");
  calibrate->add_option("--set", cal_sets, "template override key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_config, run_out, run_message, run_attack,
                     run_burst_count, run_burst_kind, run_sets, run_seed,
                     quiet);
    }
    if (*plan) return cmd_plan(plan_path, plan_out, plan_jobs, plan_sets, quiet);
    if (*assess) {
      return cmd_assess(assess_with, assess_without, assess_alpha, assess_out,
                        assess_format);
    }
    if (*decode) {
      return cmd_decode(decode_trace, decode_threshold, thr_opt->count() > 0,
                        decode_preamble, decode_fpb, decode_truth, decode_out,
                        decode_format);
    }
    if (*ingest) {
      return cmd_ingest(ingest_input, ingest_out, ingest_freq, ingest_attack,
                        ingest_digest, ingest_seed, quiet);
    }
    if (*report) return cmd_report(report_dir, quiet);
    if (*calibrate) {
      return cmd_calibrate(cal_ref, cal_config, cal_out, cal_sets, quiet);
    }
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
