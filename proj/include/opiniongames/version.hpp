#pragma once

namespace opg {
inline constexpr const char* kVersion = "0.1.0";
}
