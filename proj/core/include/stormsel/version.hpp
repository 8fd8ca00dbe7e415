#pragma once

namespace stormsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stormsel
