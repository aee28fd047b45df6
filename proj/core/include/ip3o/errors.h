#ifndef IP3O_ERRORS_H_
#define IP3O_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ip3o {

// Array or matrix dimensions disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A forward value or gradient became NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of an operation (e.g. an action
// outside the action space).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The log barrier was evaluated on a violated constraint.
class InfeasibleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Hyperparameters violate their stated ranges.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptyBatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Experiment configuration could not be parsed or validated. `where` names
// the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::invalid_argument(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace ip3o

#endif  // IP3O_ERRORS_H_
