#pragma once

#include <stdexcept>
#include <string>

namespace nirom {

/// Failure categories. The CLI maps them onto its exit codes.
enum class ErrorKind { Numeric, Domain, Config, Io, Interrupted };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Precondition violated by caller-supplied data (shape, range, non-finite input).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// An algorithm failed to converge or hit a degenerate configuration.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Raised when a campaign stops early (signal or evaluation cap); the ledger is flushed first.
class Interrupted : public Error {
 public:
  explicit Interrupted(const std::string& what) : Error(ErrorKind::Interrupted, what) {}
};

}  // namespace nirom

namespace nirom {

/// Rethrows `e` as the same error kind with `context` appended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = std::string(e.what()) + " (" + context + ")";
  switch (e.kind()) {
    case ErrorKind::Numeric: throw NumericError(what);
    case ErrorKind::Domain: throw DomainError(what);
    case ErrorKind::Config: throw ConfigError(what);
    case ErrorKind::Io: throw IoError(what);
    case ErrorKind::Interrupted: throw Interrupted(what);
  }
  throw NumericError(what);
}

}  // namespace nirom
