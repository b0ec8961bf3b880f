#pragma once

namespace ctmix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ctmix
