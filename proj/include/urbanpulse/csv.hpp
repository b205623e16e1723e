#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace urbanpulse::csv {

/// Splits one RFC-4180 record (no embedded newlines). Returns nullopt and
/// sets `error` on an unterminated or misplaced quote.
std::optional<std::vector<std::string>> split_line(std::string_view line, std::string& error);

/// Quotes a field when it contains a comma, quote, or leading/trailing space.
std::string quote(std::string_view field);

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Line reader that tracks 1-based line numbers and strips a trailing `\r`.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line);
    std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_{0};
};

}  // namespace urbanpulse::csv
