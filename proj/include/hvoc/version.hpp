#pragma once

namespace hvoc {

inline constexpr const char* kEngineName = "hvoc";
inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace hvoc
