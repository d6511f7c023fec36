#pragma once

#include <optional>
#include <string>

namespace shrinklab {

/// Shortest round-trip decimal form of a double (to_chars), so output is
/// locale-independent and bit-stable across runs.
std::string format_double(double value);

/// Empty field for missing values, formatted number otherwise.
std::string format_optional(const std::optional<double>& value);

}  // namespace shrinklab
