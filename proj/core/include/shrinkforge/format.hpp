#pragma once

#include <string>

namespace shrinkforge {

/// Header comment carried by every emitted CSV file.
inline constexpr const char* kSchemaHeader = "# shrinkforge-v1";

/// Shortest text that reads back to the same double ("%.17g" fallback).
std::string format_double(double value);

}  // namespace shrinkforge
