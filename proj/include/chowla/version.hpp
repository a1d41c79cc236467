#pragma once

namespace chowla {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace chowla
