#pragma once

namespace p2g {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace p2g
