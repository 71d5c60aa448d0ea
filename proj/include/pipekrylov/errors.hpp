#pragma once

#include <stdexcept>
#include <string>

namespace pipekrylov {

/// Vector/operator sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid generator, preconditioner or solver parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A preconditioner could not be built for the given operator.
class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Method and operator/preconditioner combination is not admissible.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed serialized input (CSV traces, config files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pipekrylov
