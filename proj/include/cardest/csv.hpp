#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace cardest::csv {

// Locale-independent shortest round-trip formatting ('.' decimal point, no
// grouping). NaN prints as "nan".
std::string number(double v);
std::string number(std::int64_t v);

// Writes one comma-separated row followed by '\n'.
void row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace cardest::csv
