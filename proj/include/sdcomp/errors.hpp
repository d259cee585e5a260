#pragma once

#include <stdexcept>
#include <string>

namespace sdcomp {

// Failure taxonomy shared by the library and the CLI exit codes:
// usage=1, io=2, format=3, transport=4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Any malformed or invariant-violating data: file syntax, bitstream
// grammar, out-of-range domain values.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdcomp
