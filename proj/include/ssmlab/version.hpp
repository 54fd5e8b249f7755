#pragma once

namespace ssmlab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ssmlab
