#include "shrinklab/csv.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace shrinklab {

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf, ptr);
}

std::string format_optional(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string();
}

}  // namespace shrinklab
