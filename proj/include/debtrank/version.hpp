#pragma once

namespace debtrank {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace debtrank
