#pragma once
// Shared fixtures for the unit suites: quick config builders, source-tree
// paths from the environment, and throwaway directories.

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "tccsim/rng.hpp"
#include "tccsim/sim_config.hpp"

namespace testutil {

inline std::filesystem::path src_dir() {
  if (const char* d = std::getenv("TCCSIM_SRC_DIR")) return d;
  return std::filesystem::current_path();
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("tccsim_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// A small jitter-free system for exact-arithmetic tests.
inline simkernel::SimConfig exact_config() {
  auto cfg = simkernel::default_config();
  cfg.jitter.kind = simkernel::JitterKind::none;
  cfg.jitter.tail_probability = 0.0;
  cfg.sim_duration_ns = 30'000'000'000;  // 30 s -> ~74 frames
  return cfg;
}

}  // namespace testutil
