#pragma once

namespace eerkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eerkit
