#pragma once

namespace sirs {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace sirs
