#include "tccsim/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tccsim/digest.hpp"

namespace simkernel {

using nlohmann::json;
using tccsim::to_hex16;

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

std::string trace_meta_json(const TraceMeta& meta) {
  json j;
  j["format"] = "tccsim-trace-v1";
  j["config_digest"] = to_hex16(meta.config_digest);
  j["seed"] = meta.seed;
  j["attack"] = meta.attack;
  j["counter_freq"] = meta.counter_freq;
  j["start_offset_ticks"] = meta.start_offset_ticks;
  return j.dump(2) + "\n";
}

TraceMeta parse_trace_meta_json(const std::string& text) {
  json j = json::parse(text);
  TraceMeta m;
  m.config_digest = tccsim::parse_hex64(j.at("config_digest").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.attack = j.at("attack").get<bool>();
  m.counter_freq = j.at("counter_freq").get<std::int64_t>();
  m.start_offset_ticks = j.at("start_offset_ticks").get<std::uint64_t>();
  return m;
}

void write_trace_csv(const TimingTrace& trace,
                     const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) {
    throw std::runtime_error("cannot write trace file: " + csv_path.string());
  }
  out << "frame_index,delta_ticks\n";
  for (const auto& s : trace.samples) {
    out << s.frame_index << ',' << s.delta_ticks << '\n';
  }
  out.close();
  if (!out) {
    throw std::runtime_error("short write on trace file: " +
                             csv_path.string());
  }

  std::ofstream meta(meta_path_for(csv_path));
  if (!meta) {
    throw std::runtime_error("cannot write trace metadata sidecar for: " +
                             csv_path.string());
  }
  meta << trace_meta_json(trace.meta);
}

std::vector<TraceSample> parse_trace_samples_csv(const std::string& text,
                                                 const std::string& origin) {
  std::istringstream in(text);
  std::vector<TraceSample> samples;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw std::runtime_error(origin + ": empty trace file");
  }
  ++line_no;
  if (line != "frame_index,delta_ticks") {
    throw std::runtime_error(origin +
                             ": missing trace header 'frame_index,delta_ticks'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    TraceSample s;
    char comma = 0;
    if (!(row >> s.frame_index >> comma >> s.delta_ticks) || comma != ',') {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": malformed row");
    }
    if (s.delta_ticks == 0) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": delta_ticks must be > 0");
    }
    samples.push_back(s);
  }
  return samples;
}

TimingTrace read_trace_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    throw std::runtime_error("cannot read trace file: " + csv_path.string());
  }
  std::ostringstream csv_buf;
  csv_buf << in.rdbuf();
  TimingTrace trace;
  trace.samples = parse_trace_samples_csv(csv_buf.str(), csv_path.string());

  const auto meta_path = meta_path_for(csv_path);
  std::ifstream meta(meta_path);
  if (!meta) {
    throw std::runtime_error("missing trace metadata sidecar: " +
                             meta_path.string());
  }
  std::ostringstream buf;
  buf << meta.rdbuf();
  trace.meta = parse_trace_meta_json(buf.str());
  return trace;
}

}  // namespace simkernel
