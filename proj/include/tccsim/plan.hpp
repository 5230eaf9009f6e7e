#pragma once
// Experimental campaign runner: grid expansion with derived per-run seeds,
// parallel execution with incremental persistence and resume, external
// trace ingestion, and the findings report.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tccsim/plan_types.hpp"
#include "tccsim/stats.hpp"
#include "tccsim/trace.hpp"

namespace harness {

// Deterministic per-run seed: splitmix chain over the master seed, the grid
// coordinates, the attack flag and the repetition index.
std::uint64_t derive_run_seed(std::uint64_t master_seed, const GridPoint& p,
                              bool attack, int repetition);

// Lexicographic expansion over the (sorted, deduplicated) parameter sets;
// per grid point: the no-attack arm first, then the attack arm, repetitions
// innermost. Throws std::invalid_argument on empty sets or > 100000 runs.
std::vector<RunDescriptor> expand_plan(const ExperimentPlan& plan);

std::uint64_t plan_digest(const ExperimentPlan& plan);

struct GridOutcome {
  GridPoint point;
  std::uint64_t config_digest = 0;
  bool complete = false;
  std::string error;  // set when the point's runs failed validation/execution
  timestats::AttackVerdict verdict;  // meaningful when complete
  double min_p = 1.0;
  double wall_seconds = 0.0;  // summed run time for the point
  std::vector<std::string> with_keys;  // trace run keys, repetition order
  std::vector<std::string> without_keys;
  std::vector<std::string> with_digests;  // trace content digests (hex)
  std::vector<std::string> without_digests;
};

struct PlanResult {
  std::uint64_t plan_digest = 0;
  std::string toolkit_version;
  bool partial = false;
  int executed_runs = 0;
  int skipped_runs = 0;  // resumed from disk
  std::vector<GridOutcome> outcomes;
};

// Executes all runs with a bounded worker pool (jobs <= 0 means hardware
// concurrency), persisting traces under out_dir/traces/<run_key>.csv as
// they complete. Runs whose trace already exists with matching metadata
// are skipped, which makes interrupted plans resumable. Failed points are
// recorded and the rest proceed.
PlanResult run_plan(const ExperimentPlan& plan,
                    const std::filesystem::path& out_dir, int jobs = 0);

// plan.json manifest + verdicts.csv under out_dir.
void write_plan_artifacts(const PlanResult& result,
                          const ExperimentPlan& plan,
                          const std::filesystem::path& out_dir);
PlanResult load_plan_result(const std::filesystem::path& out_dir);

// report.md plus plot-ready per-point histogram CSVs under out_dir/hist/.
void write_report(const PlanResult& result, const ExperimentPlan& plan,
                  const std::filesystem::path& out_dir);

struct IngestMeta {
  std::optional<std::int64_t> counter_freq;
  std::optional<bool> attack;
  std::optional<std::uint64_t> config_digest;
  std::optional<std::uint64_t> seed;
};

// Accepts the trace CSV format (sidecar optional if `supplied` covers the
// required fields) or a raw timestamp list, one counter value per line,
// from which deltas are computed. Required metadata: counter_freq and
// attack. Errors carry line numbers for non-monotone timestamps.
simkernel::TimingTrace ingest_trace(const std::filesystem::path& path,
                                    const IngestMeta& supplied = {});

}  // namespace harness
