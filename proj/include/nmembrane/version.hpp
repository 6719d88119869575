#pragma once

namespace nmembrane {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nmembrane
