#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coevo::io {

/// Reads one RFC 4180 record (quoted fields may span lines). Returns false at end of input.
/// `line` is advanced by the number of physical lines consumed.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line);

/// Quotes a field when it contains a separator, quote, or line break.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Fixed 9-significant-digit rendering; missing values (NaN) render as an empty field.
std::string format_real(double value);
std::string format_real(const std::optional<double>& value);

/// Empty field or "nan" parse to NaN.
double parse_real(std::string_view text);

}  // namespace coevo::io
