#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t record = 0; ///< 1-based record index, blank lines not counted
    std::size_t line = 0;   ///< 1-based line where the record starts
};

/// RFC 4180 reader: quoted fields may hold commas, newlines and "" escapes.
/// Blank lines are skipped. Throws ParseError on an unterminated quote or on
/// stray characters after a closing quote.
std::vector<Row> parse(std::string_view text);

/// Quote a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

/// Quote every field unconditionally, as CodeQL does.
std::string join_quoted(const std::vector<std::string>& fields);

std::string join(const std::vector<std::string>& fields);

} // namespace llmsast::csv
