#pragma once

namespace mot {

inline constexpr const char* kToolName = "mot3d";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace mot
