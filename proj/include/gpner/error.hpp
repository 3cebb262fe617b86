#pragma once

#include <stdexcept>
#include <string>

namespace gpner {

// Shape mismatch in a numeric operation. Messages name the offending shapes.
struct DimError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid user input: bad config keys, malformed corpora, out-of-range spans.
// The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number where known.
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

}  // namespace gpner
