#pragma once

#include <stdexcept>
#include <string>

namespace ctmix {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Two weight vectors cannot be index-aligned (different truncation lengths
// and the shorter one carries unresolved tail mass).
class AlignmentError : public Error {
public:
  using Error::Error;
};

// A truncated representation was asked for information it dropped
// (e.g. the tail of a WeightVector was selected and no extension rule given).
class TruncationError : public Error {
public:
  using Error::Error;
};

// A time beyond the materialized horizon of a Partition was queried.
class HorizonError : public Error {
public:
  using Error::Error;
};

// No jump is active at the queried time; NRM weights are undefined.
class NoActiveJumpError : public Error {
public:
  using Error::Error;
};

// Invalid or unsupported configuration (CLI exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
  using Error::Error;
};

}  // namespace ctmix
