#pragma once

#include <stdexcept>
#include <string>

namespace d2pc {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, non-finite entries, bad bounds.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// Data set too short for the requested operation.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Input generation failed to reach the required excitation order.
class ExcitationError : public Error {
public:
  using Error::Error;
};

// Lookup of a named entity (benchmark, table) failed.
class NotFoundError : public Error {
public:
  using Error::Error;
};

// Inconsistent experiment or controller configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// File could not be read or written.
class FileError : public Error {
public:
  using Error::Error;
};

} // namespace d2pc
