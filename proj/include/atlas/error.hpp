#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atlas {

// Bad input data: malformed files, unknown labels, violated type invariants.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A malformed row in a line-oriented file. line is 1-based.
class ParseError : public DataError {
 public:
  enum class Kind { ColumnCount, UnknownDimension, UnknownSplit, BadValue };

  ParseError(Kind kind, std::size_t line, const std::string& detail)
      : DataError("line " + std::to_string(line) + ": " + detail),
        kind_(kind),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// NaN/Inf encountered in a numeric routine.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace atlas
