#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace crisis::csv {

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

// Splits one line on commas. Fields in this project's tables never contain
// commas or quotes, so no quoting is applied or understood.
std::vector<std::string> split(std::string_view line, char delimiter = ',');

std::string trim(std::string_view s);

double parse_number(std::string_view field);

}  // namespace crisis::csv
