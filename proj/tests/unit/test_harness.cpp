#include <doctest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "tccsim/config_io.hpp"
#include "tccsim/plan.hpp"
#include "tccsim/simulator.hpp"
#include "tccsim/trace_io.hpp"

using namespace harness;

namespace {

ExperimentPlan tiny_plan() {
  ExperimentPlan plan;
  plan.switch_durations_ns = {25'000};
  plan.tick_frequencies = {10};
  plan.benign_board_counts = {1};
  plan.speed_exponents = {0};
  plan.repetitions = 2;
  plan.sim_duration_ns = 15'000'000'000;  // ~37 frames
  plan.master_seed = 7;
  plan.template_config = simkernel::default_config();
  return plan;
}

}  // namespace

TEST_CASE("expand_plan: default grid is 36 points / 216 runs") {
  ExperimentPlan plan;
  plan.template_config = simkernel::default_config();
  const auto runs = expand_plan(plan);
  CHECK(plan.grid_size() == 36);
  CHECK(runs.size() == 216);

  // deterministic lexicographic ordering, no-attack arm first
  CHECK(runs[0].point.switch_duration_ns == 1'000);
  CHECK(runs[0].point.tick_frequency == 10);
  CHECK(runs[0].point.benign_boards == 1);
  CHECK(runs[0].point.speed_exponent == 0);
  CHECK_FALSE(runs[0].attack);
  CHECK(runs[0].repetition == 0);
  CHECK(runs[2].repetition == 2);
  CHECK(runs[3].attack);
  CHECK(runs.back().point.switch_duration_ns == 10'000'000);
  CHECK(runs.back().point.speed_exponent == 2);

  // all derived seeds distinct across the full plan
  std::set<std::uint64_t> seeds;
  for (const auto& r : runs) seeds.insert(r.seed);
  CHECK(seeds.size() == runs.size());

  // instantiation: benign count and the point parameters applied
  for (const auto& r : runs) {
    CHECK(r.config.enforced_switch_duration_ns ==
          r.point.switch_duration_ns);
    CHECK(r.config.tick_frequency == r.point.tick_frequency);
    CHECK(static_cast<int>(r.config.boards.size()) ==
          r.point.benign_boards + 3);
    CHECK(r.config.seed == r.seed);
  }
}

TEST_CASE("expand_plan: singleton sets and guards") {
  auto plan = tiny_plan();
  const auto runs = expand_plan(plan);
  CHECK(runs.size() == 2 * 2);  // 1 point x 2 arms x 2 reps

  SUBCASE("empty set") {
    plan.speed_exponents.clear();
    CHECK_THROWS_AS((void)expand_plan(plan), std::invalid_argument);
  }
  SUBCASE("grid overflow guard") {
    plan.repetitions = 100'000;
    CHECK_THROWS_AS((void)expand_plan(plan), std::invalid_argument);
  }
  SUBCASE("template without sender") {
    plan.template_config.boards[1].role = simkernel::BoardRole::benign;
    CHECK_THROWS_AS((void)expand_plan(plan), std::invalid_argument);
  }
}

TEST_CASE("run_plan persists, assesses and resumes") {
  const auto out = testutil::fresh_dir("plan");
  const auto plan = tiny_plan();

  const auto result = run_plan(plan, out, 2);
  CHECK(result.executed_runs == 4);
  CHECK(result.skipped_runs == 0);
  CHECK_FALSE(result.partial);
  REQUIRE(result.outcomes.size() == 1);
  CHECK(result.outcomes[0].complete);
  CHECK(result.outcomes[0].verdict.repetitions.size() == 2);
  CHECK(std::filesystem::exists(out / "plan.json"));
  CHECK(std::filesystem::exists(out / "verdicts.csv"));
  CHECK(std::filesystem::exists(out / "traces"));

  // resume: a second invocation simulates nothing new
  const auto again = run_plan(plan, out, 2);
  CHECK(again.executed_runs == 0);
  CHECK(again.skipped_runs == 4);
  CHECK(again.outcomes[0].with_digests == result.outcomes[0].with_digests);
  CHECK(again.outcomes[0].without_digests ==
        result.outcomes[0].without_digests);

  // manifest round trip
  const auto loaded = load_plan_result(out);
  CHECK(loaded.plan_digest == result.plan_digest);
  REQUIRE(loaded.outcomes.size() == 1);
  CHECK(loaded.outcomes[0].verdict.feasible ==
        result.outcomes[0].verdict.feasible);
}

TEST_CASE("run_plan records failing points and proceeds") {
  auto plan = tiny_plan();
  // 200 benign boards need a >20s major frame; 15s duration cannot cover
  // 30 frames, so that point fails validation while the other completes.
  plan.benign_board_counts = {1, 200};
  const auto out = testutil::fresh_dir("partial");
  const auto result = run_plan(plan, out, 2);
  CHECK(result.partial);
  REQUIRE(result.outcomes.size() == 2);
  CHECK(result.outcomes[0].complete);
  CHECK_FALSE(result.outcomes[1].complete);
  CHECK(result.outcomes[1].error.find("major frames") != std::string::npos);

  // the report flags the incomplete point
  write_report(result, plan, out);
  const auto report = cfgio::read_text_file(out / "report.md");
  CHECK(report.find("Incomplete grid points") != std::string::npos);
}

TEST_CASE("report covers closed and open outcomes") {
  SUBCASE("all closed") {
    auto plan = tiny_plan();
    plan.switch_durations_ns = {10'000'000};  // full masking
    const auto out = testutil::fresh_dir("closed");
    const auto result = run_plan(plan, out, 2);
    write_report(result, plan, out);
    const auto report = cfgio::read_text_file(out / "report.md");
    CHECK(report.find("No timing covert channel detected") !=
          std::string::npos);
  }
  SUBCASE("open channel recommends the smallest closing padding") {
    auto plan = tiny_plan();
    plan.switch_durations_ns = {1'000, 10'000'000};
    const auto out = testutil::fresh_dir("open");
    const auto result = run_plan(plan, out, 2);
    REQUIRE(result.outcomes.size() == 2);
    CHECK(result.outcomes[0].verdict.feasible);        // 1us
    CHECK_FALSE(result.outcomes[1].verdict.feasible);  // 10ms
    write_report(result, plan, out);
    const auto report = cfgio::read_text_file(out / "report.md");
    CHECK(report.find("at least 10ms") != std::string::npos);
    CHECK(std::filesystem::exists(
        out / "hist" / (result.outcomes[0].point.key() + "_with.csv")));
  }
}

TEST_CASE("benign-board count does not move a masked verdict") {
  auto plan = tiny_plan();
  plan.switch_durations_ns = {10'000'000};
  plan.benign_board_counts = {1, 3};
  plan.sim_duration_ns = 30'000'000'000;
  const auto out = testutil::fresh_dir("neutral");
  const auto result = run_plan(plan, out, 2);
  REQUIRE(result.outcomes.size() == 2);
  for (const auto& o : result.outcomes) {
    CHECK(o.complete);
    CHECK_FALSE(o.verdict.feasible);
  }
}

TEST_CASE("ingest_trace raw timestamp lists") {
  const auto dir = testutil::fresh_dir("ingest");
  SUBCASE("differencing") {
    cfgio::write_text_file(dir / "raw.txt", "100\n300\n600\n");
    IngestMeta meta;
    meta.counter_freq = 1'000'000'000;
    meta.attack = false;
    const auto t = ingest_trace(dir / "raw.txt", meta);
    REQUIRE(t.samples.size() == 2);
    CHECK(t.samples[0].delta_ticks == 200);
    CHECK(t.samples[1].delta_ticks == 300);
    CHECK(t.meta.start_offset_ticks == 100);
  }
  SUBCASE("non-monotone timestamps carry the line number") {
    cfgio::write_text_file(dir / "bad.txt", "100\n300\n250\n");
    IngestMeta meta;
    meta.counter_freq = 1'000'000'000;
    meta.attack = false;
    try {
      (void)ingest_trace(dir / "bad.txt", meta);
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
      CHECK(std::string(e.what()).find("non-monotone") != std::string::npos);
    }
  }
  SUBCASE("missing metadata lists the required fields") {
    cfgio::write_text_file(dir / "raw2.txt", "1\n2\n");
    try {
      (void)ingest_trace(dir / "raw2.txt", {});
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("counter_freq") != std::string::npos);
      CHECK(msg.find("attack") != std::string::npos);
    }
  }
  SUBCASE("physical-scale deltas survive ingestion exactly") {
    cfgio::write_text_file(dir / "phys.txt",
                           "360000000\n720000123\n1080000246\n");
    IngestMeta meta;
    meta.counter_freq = 1'500'000'000;
    meta.attack = false;
    const auto t = ingest_trace(dir / "phys.txt", meta);
    CHECK(t.samples[0].delta_ticks == 360'000'123ull);
    CHECK(t.samples[1].delta_ticks == 360'000'123ull);
  }
}

TEST_CASE("exported traces round-trip through ingest losslessly") {
  auto cfg = simkernel::default_config();
  cfg.sim_duration_ns = 15'000'000'000;
  const auto result = simkernel::run_simulation(simkernel::require_valid(cfg));

  const auto dir = testutil::fresh_dir("roundtrip");
  const auto csv = dir / "trace.csv";
  simkernel::write_trace_csv(result.trace, csv);
  const auto back = ingest_trace(csv, {});

  CHECK(back.digest() == result.trace.digest());
  CHECK(back.meta.seed == result.trace.meta.seed);
  CHECK(back.meta.config_digest == result.trace.meta.config_digest);
  REQUIRE(back.samples.size() == result.trace.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(back.samples[i].delta_ticks ==
          result.trace.samples[i].delta_ticks);
    CHECK(back.samples[i].frame_index ==
          result.trace.samples[i].frame_index);
  }
}
