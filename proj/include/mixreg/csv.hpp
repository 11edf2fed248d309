#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixreg::csv {

/// Shortest-safe round-trip form: 17 significant digits, "%.17g".
std::string format(double value);
/// Empty field for a missing value.
std::string format(const std::optional<double>& value);

std::vector<std::string> split(std::string_view line, char sep = ',');
/// Strict: the whole field must parse. Throws Error(InvalidInput) otherwise.
double parse_double(std::string_view field);

/// Joins already formatted fields with commas.
std::string join(const std::vector<std::string>& fields);

}  // namespace mixreg::csv
