#pragma once

namespace coopmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace coopmc
