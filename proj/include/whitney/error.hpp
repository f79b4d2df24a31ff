#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace whitney {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: bad files, inconsistent dimensions, unknown ids.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Expression text that does not match the grammar, or names an unknown
/// function / out-of-range variable.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A mathematical operation left its domain (division by zero, log of a
/// non-positive value, a series whose constant term is not admissible).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of the numerical machinery that are not input errors.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// No dyadic level up to the configured maximum resolves the query point.
class ResolutionExceeded : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The query point lies on the closed set, where no cube exists.
class OnSet : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Adaptive evaluation needs a Taylor degree beyond the stored jet order.
class ScheduleExhausted : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A sub-atlas no longer charts some jet point.
class CoverageError : public InputError {
 public:
  using InputError::InputError;
};

/// Jets that should agree (glue overlaps, transported pieces) do not.
class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace whitney
