#pragma once

#include <stdexcept>
#include <string>

namespace extrans {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated input file (CIFAR, PPM, PNG, CSV, JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Image geometry incompatible with the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace extrans
