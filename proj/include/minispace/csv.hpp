#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace minispace::csv {

/// Shortest decimal string that reads back as the same double.
std::string format_number(double value);

/// Quote a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Append one CRLF-terminated record.
void append_row(std::string& out, const std::vector<std::string>& fields);

/// Parse RFC 4180 text into records. Accepts LF or CRLF line ends; a final
/// line break is optional. Throws ParseError with the byte offset of an
/// unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace minispace::csv
