#pragma once

#include <stdexcept>
#include <string>

namespace hvc {

// Malformed container or header.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedCodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an out-of-range or inconsistent parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input violates an operation precondition (e.g. a non-real DC bin).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Transport, auth or protocol failure of a transcriber backend. Distinct from
// a rejection verdict.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hvc
