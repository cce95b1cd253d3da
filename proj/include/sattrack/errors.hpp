#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sattrack {

/// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Image has the wrong pixel format for the requested operation.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or config. `offset()` is the byte offset where
/// parsing failed (or the line number for line-oriented text formats).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// I/O failure or missing data file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normal equations are under-determined or rank deficient.
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite cost or solution.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sattrack
