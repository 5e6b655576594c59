#pragma once

#include <stdexcept>
#include <string>

namespace gsp {

// Malformed arguments or file contents (bad node index, overlapping sets,
// unparseable line). The CLI maps this to exit code 3.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation was violated by the caller,
// e.g. reversing an arrow that is not covered.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Singular covariance submatrix, failed regression.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refusal to enumerate beyond a factorial-size guard. CLI exit code 4.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that must hold by construction did not. CLI exit code 1.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace gsp
