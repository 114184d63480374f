#pragma once

namespace ydim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ydim
