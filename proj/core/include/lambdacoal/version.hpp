#pragma once

namespace lambdacoal {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lambdacoal
