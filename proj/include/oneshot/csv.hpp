#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace oneshot::csv {

// RFC 4180 record reader. Handles quoted fields with embedded commas,
// escaped quotes ("") and newlines inside quoted fields. Accepts both LF
// and CRLF line endings.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Next record, or nullopt at end of input. `line` receives the
    // 1-based line number the record started on (for error messages).
    std::optional<std::vector<std::string>> next(std::size_t& line);

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

std::string escape_field(const std::string& field);
void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace oneshot::csv
