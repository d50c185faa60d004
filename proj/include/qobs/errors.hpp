#pragma once

#include <stdexcept>
#include <string>

namespace qobs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or state-space description violates its invariants.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A numeric argument is outside an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class NetworkErrorKind { PortNotFound, PortAlreadyUsed, SingularLoop };

class NetworkError : public Error {
 public:
  NetworkError(NetworkErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  NetworkErrorKind kind() const noexcept { return kind_; }

 private:
  NetworkErrorKind kind_;
};

/// Raised when a steady state is requested for a non-Hurwitz drift.
class NotHurwitz : public Error {
 public:
  using Error::Error;
};

class NotVerifiable : public Error {
 public:
  using Error::Error;
};

}  // namespace qobs
