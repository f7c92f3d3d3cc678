#pragma once

namespace rlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kVersionTag = "resolvent-lab 0.1.0";
inline constexpr int kResultSchemaVersion = 1;

} // namespace rlab
