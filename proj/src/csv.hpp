#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fadelab::detail {

// Shortest round-trip decimal representation of a double ("%.17g" fallback),
// so CSV output is byte-reproducible and parses back to the same bits.
std::string format_double(double v);

double parse_double(const std::string& s, const std::string& context, std::size_t lineno);

std::int64_t parse_int(const std::string& s, const std::string& context, std::size_t lineno);

std::vector<std::string> split_csv_line(const std::string& line);

// Removes a trailing '\r' (CRLF input tolerated, output is always LF).
void strip_eol(std::string& line);

} // namespace fadelab::detail
