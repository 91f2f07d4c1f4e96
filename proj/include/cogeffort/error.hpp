#pragma once

#include <stdexcept>
#include <string>

namespace cogeffort {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (bad cutoff, bad
/// question order, too few samples, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Input data is malformed, inconsistent or incomplete.
class DataError : public Error {
public:
  using Error::Error;
};

}  // namespace cogeffort
