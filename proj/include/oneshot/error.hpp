#pragma once

#include <stdexcept>
#include <string>

namespace oneshot {

// All recoverable failures (bad input files, contract violations) surface as
// Error; callers that must not abort (the grid runner) catch it per cell.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Output-side failures (unwritable paths, short writes). The CLI maps these
// to exit code 3, everything else recoverable to 1.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace oneshot
