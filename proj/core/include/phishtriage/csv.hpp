#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phishtriage::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
/// line breaks and doubled quotes. Accepts CRLF or LF line endings.
std::vector<Row> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string format_row(const Row& row);

}  // namespace phishtriage::csv
