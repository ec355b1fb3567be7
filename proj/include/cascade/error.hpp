#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cascade {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL or residue text. Carries a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " +
              what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed text denoting an invalid object, e.g. cycle(0).
class SemanticError : public ParseError {
 public:
  SemanticError(const std::string& what, std::size_t line, std::size_t column)
      : ParseError(what, line, column) {}
};

class InvalidPoint : public Error {
 public:
  using Error::Error;
};

class MalformedResidue : public Error {
 public:
  using Error::Error;
};

class UnderdeterminedResidue : public Error {
 public:
  using Error::Error;
};

class NoInverse : public Error {
 public:
  using Error::Error;
};

class NotAllPeriodic : public Error {
 public:
  NotAllPeriodic() : Error("presentation has aperiodic points") {}
};

class IncompatibleSpec : public Error {
 public:
  using Error::Error;
};

class InvalidElement : public Error {
 public:
  using Error::Error;
};

/// Exact arithmetic left the 64-bit range, or a requested structure is too large.
class Overflow : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade
