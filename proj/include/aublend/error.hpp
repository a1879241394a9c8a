#pragma once

#include <stdexcept>
#include <string>

namespace aublend {

// Base of every error thrown by the library. CLI exit codes are derived
// from the concrete type (see tools/aublend.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape or dimension disagreement.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid model / operator configuration (heads, kernel, codebook size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse: backward twice, non-scalar loss, k == 0, ...
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Domain data failed validation (activation weights, AU ids, V mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file, or filesystem failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Unknown name in a lookup table (emotion presets, identities).
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace aublend
