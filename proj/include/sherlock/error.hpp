#pragma once

#include <stdexcept>
#include <string>

namespace sherlock {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, corpora, matrices).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A stored model does not match the running build (schema hash, version).
class SchemaMismatch : public DataError {
 public:
  using DataError::DataError;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace sherlock
