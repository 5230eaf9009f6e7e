#pragma once

namespace tccsim {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kTraceFormat = "tccsim-trace-v1";

}  // namespace tccsim
