#pragma once

namespace ranslice {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ranslice
