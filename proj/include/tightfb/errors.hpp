#pragma once

#include <stdexcept>
#include <string>

namespace tightfb {

// Bad shapes, lengths, or parameter ranges. Maps to CLI exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerically undefined requests, e.g. a filterbank that is not a frame.
// Maps to CLI exit code 2.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Problem too large for a dense or finite-difference code path.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system and container-format failures. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace tightfb
