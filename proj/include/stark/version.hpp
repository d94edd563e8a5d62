#pragma once

namespace stark {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace stark
