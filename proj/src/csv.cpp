#include "rankstab/csv.hpp"

#include "rankstab/errors.hpp"

namespace rankstab {

CsvReader::CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    if (first_) {
        first_ = false;
        if (in_.peek() == 0xEF) {
            char bom[3] = {};
            in_.read(bom, 3);
            if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
                throw ParseError(1, "unexpected bytes at start of input");
            }
        }
    }
    if (in_.peek() == std::char_traits<char>::eof()) return false;

    record_line_ = current_line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    for (;;) {
        const int c = in_.get();
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw ParseError(record_line_, "unterminated quoted field");
            fields.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++current_line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !field_was_quoted) {
            quoted = true;
            field_was_quoted = true;
        } else if (ch == delimiter_) {
            fields.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
        } else if (ch == '\r' && in_.peek() == '\n') {
            // CR of a CRLF pair.
        } else if (ch == '\n') {
            ++current_line_;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields, char delimiter) {
    bool first = true;
    for (const auto& field : fields) {
        if (!first) out << delimiter;
        first = false;
        const bool needs_quotes = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
        if (!needs_quotes) {
            out << field;
            continue;
        }
        out << '"';
        for (const char c : field) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    }
    out << '\n';
}

}  // namespace rankstab
