#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace nldg::csv {

/// Shortest round-trip representation; "nan"/"inf" for non-finite values.
std::string num(double x);

/// Writes one comma-separated row followed by '\n'.
void row(std::ostream& os, std::initializer_list<std::string_view> cells);

}  // namespace nldg::csv
