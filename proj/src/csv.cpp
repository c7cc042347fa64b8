#include "oneshot/csv.hpp"

#include <istream>
#include <ostream>

#include "oneshot/error.hpp"

namespace oneshot::csv {

std::optional<std::vector<std::string>> Reader::next(std::size_t& line) {
    int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return std::nullopt;

    line = line_ + 1;  // line_ counts newlines consumed so far

    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;

    while (true) {
        c = in_.get();
        if (c == std::char_traits<char>::eof()) {
            if (in_quotes) throw Error("csv: unterminated quoted field starting near line " +
                                       std::to_string(line));
            fields.push_back(std::move(field));
            return fields;
        }
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
        } else if (ch == '\r') {
            // part of CRLF; a bare \r inside an unquoted field is kept
            if (in_.peek() == '\n') {
                in_.get();
                ++line_;
                fields.push_back(std::move(field));
                return fields;
            }
            field.push_back(ch);
        } else if (ch == '\n') {
            ++line_;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(ch);
        }
    }
}

std::string escape_field(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape_field(fields[i]);
    }
    out << '\n';
}

}  // namespace oneshot::csv
