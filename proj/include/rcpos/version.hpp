#pragma once

namespace rcpos {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rcpos
