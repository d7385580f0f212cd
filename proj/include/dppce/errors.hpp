#pragma once

#include <stdexcept>
#include <string>

namespace dppce {

/// Malformed arguments: bad indices, invalid flags, unparseable files.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Conditioning on a set the model assigns zero probability.
struct ConditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A gradient was requested at a point where it does not exist
/// (singular restricted minor).
struct GradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Negative-sample generation exhausted its options.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dppce
