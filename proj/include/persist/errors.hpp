#ifndef PERSIST_ERRORS_HPP
#define PERSIST_ERRORS_HPP

#include <stdexcept>

namespace persist {

/// An argument lies outside the domain of the operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver target cannot be met by any admissible value.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace persist

#endif  // PERSIST_ERRORS_HPP
