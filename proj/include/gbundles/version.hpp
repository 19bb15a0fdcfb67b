#pragma once

namespace gbundles {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gbundles
