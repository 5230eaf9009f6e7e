#pragma once
// Trace persistence: CSV with header "frame_index,delta_ticks" plus a JSON
// metadata sidecar "<stem>.meta.json" next to it.

#include <filesystem>
#include <optional>
#include <string>

#include "tccsim/trace.hpp"

namespace simkernel {

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

// Writes CSV and sidecar; output is byte-deterministic for a given trace.
void write_trace_csv(const TimingTrace& trace,
                     const std::filesystem::path& csv_path);

// Reads CSV + sidecar; throws std::runtime_error with the offending line
// on malformed input.
TimingTrace read_trace_csv(const std::filesystem::path& csv_path);

// Parses just the sample rows (header included); origin names the source in
// error messages.
std::vector<TraceSample> parse_trace_samples_csv(const std::string& text,
                                                 const std::string& origin);

std::string trace_meta_json(const TraceMeta& meta);
TraceMeta parse_trace_meta_json(const std::string& text);

}  // namespace simkernel
