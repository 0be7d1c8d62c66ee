#pragma once

#include <stdexcept>

namespace aupipe {

// File-level problems: bad magic, bad header, truncated payload, malformed CSV.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension or length mismatch between related containers.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A value outside its documented domain (intensity range, unknown AU, non-finite input).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent configuration or dataset bookkeeping (overlapping splits, unknown
// subject, non-contiguous frame indices).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Not enough data to perform the operation (a single class, zero positives,
// fewer than two rows).
struct InsufficientDataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric breakdown at runtime: non-finite activations or loss, failed factorization.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aupipe
