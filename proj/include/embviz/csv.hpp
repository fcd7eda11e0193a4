#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace embviz::csv {

/// Shortest decimal that round-trips to the same double (std::to_chars).
std::string format_double(double value);

std::string format_int(long long value);

/// RFC-4180: quote iff the field contains a comma, quote, CR or LF;
/// embedded quotes are doubled.
std::string quote_field(std::string_view field);

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based physical line the record starts on
};

/// Parses RFC-4180 text: quoted fields may contain commas, doubled quotes and
/// newlines. Lines are LF-terminated; a CR directly before LF is dropped.
std::vector<Record> parse_text(std::string_view text);

/// Reads and parses a whole file. Throws Error if the file cannot be opened.
std::vector<Record> parse_file(const std::string& path);

} // namespace embviz::csv
