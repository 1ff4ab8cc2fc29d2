#pragma once

#include <stdexcept>
#include <string>

namespace shubin {

// Error kinds surfaced by the library. The CLI maps HypothesisError
// subclasses to exit status 2 and everything else to 1.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural hypothesis of the expansion theory does not hold.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotNormal : public HypothesisError {
 public:
  NotNormal(const std::string& what, double departure)
      : HypothesisError(what), departure_(departure) {}
  double departure() const { return departure_; }

 private:
  double departure_;
};

class NotElliptic : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

/// Kernel obstruction in an eigen-division solve.
class Unsolvable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotInDual : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shubin
