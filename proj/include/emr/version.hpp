#pragma once

namespace emr {
inline constexpr const char* kVersion = "0.1.0";
}
