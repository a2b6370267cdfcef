#pragma once

#include <stdexcept>
#include <string>

namespace navvi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario text could not be parsed; `field()` names the offending key path.
class SceneParseError : public Error {
 public:
  SceneParseError(std::string field, const std::string& what)
      : Error("malformed scene at '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Parsed scenario violates an invariant; the message lists every violation.
class SceneValidationError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

/// No unblocked route exists between the requested points.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace navvi
