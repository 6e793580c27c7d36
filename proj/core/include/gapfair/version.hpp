#pragma once

namespace gapfair {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gapfair
