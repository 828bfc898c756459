#ifndef SDPRELEX_ERRORS_HPP
#define SDPRELEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sdprelex {

// Malformed input text: bad column counts, unparseable fields, bad magic.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed text describing an invalid object: head out of range,
// cyclic tree, overlapping spans, taxonomy violations.
class StructureError : public std::runtime_error {
public:
    explicit StructureError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses, degenerate statistics.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdprelex

#endif
