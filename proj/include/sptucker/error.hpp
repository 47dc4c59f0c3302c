#pragma once

#include <stdexcept>
#include <string>

namespace sptucker {

// Precondition or data error (bad shape, malformed input, out-of-range index).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure to open, read, or write a file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sptucker
