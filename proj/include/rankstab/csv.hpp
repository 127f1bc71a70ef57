#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace rankstab {

/// Minimal RFC 4180 reader: quoted fields may contain the delimiter,
/// doubled quotes and line breaks. CRLF line endings and a leading UTF-8
/// byte-order mark are accepted.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char delimiter = ',');

    /// Reads the next record into `fields`. Returns false at end of input.
    /// Throws ParseError for an unterminated quoted field.
    bool next(std::vector<std::string>& fields);

    /// 1-based line on which the most recently returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t current_line_ = 1;
    std::size_t record_line_ = 0;
    bool first_ = true;
};

void write_csv_row(std::ostream& out, std::span<const std::string> fields, char delimiter = ',');

}  // namespace rankstab
