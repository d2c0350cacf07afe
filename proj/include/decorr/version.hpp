#pragma once

namespace decorr {

inline constexpr const char* version = "0.1.0";

} // namespace decorr
