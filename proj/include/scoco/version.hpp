#pragma once

namespace scoco {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scoco
