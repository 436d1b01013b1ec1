#pragma once

namespace holderlab {

inline constexpr const char* kToolName = "holderlab";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace holderlab
