#pragma once

namespace fm {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fm
