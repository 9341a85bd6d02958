#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dissipative {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in different ambient dimensions or have the wrong arity.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Wedge product whose grade would exceed the ambient dimension.
class GradeOverflow : public Error {
 public:
  using Error::Error;
};

/// Expression text that does not parse. offset is 0-based into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// sqrt of a negative number, division by zero and similar.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The gradient wedge degenerates, so the control field is undefined.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow or non-finite state during time integration.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_time)
      : Error(what), last_time_(last_time) {}
  double last_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of the multiplier formula fails; reason names the check.
class HypothesisError : public Error {
 public:
  HypothesisError(const std::string& reason, const std::string& what)
      : Error(what), reason_(reason) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

/// Malformed user input (system files, CSV tables, parameters).
class InputError : public Error {
 public:
  InputError(const std::string& reason, const std::string& what)
      : Error(what), reason_(reason) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

}  // namespace dissipative
