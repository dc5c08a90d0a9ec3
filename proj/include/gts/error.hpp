#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gts {

/// A structured finding about a model, mapping, or configuration.
struct Diagnostic {
  std::string code;     // e.g. "ArityMismatch", "RoleMismatch"
  std::string element;  // id of the offending element, may be empty
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(const Diagnostic& d);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotEnabled : public Error {
 public:
  using Error::Error;
};

class ExplosionGuard : public Error {
 public:
  using Error::Error;
};

class UnknownPattern : public Error {
 public:
  explicit UnknownPattern(const std::string& code)
      : Error("unknown pattern: " + code) {}
};

class MissingParam : public Error {
 public:
  MissingParam(const std::string& code, const std::string& param)
      : Error("pattern " + code + " requires parameter '" + param + "'") {}
};

class InvalidMapping : public Error {
 public:
  InvalidMapping(std::vector<Diagnostic> diagnostics, long index = -1);

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  /// Position in an application sequence, -1 for a single apply.
  long index() const { return index_; }

 private:
  std::vector<Diagnostic> diagnostics_;
  long index_;
};

class OrderViolation : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class SchemaVersionMismatch : public Error {
 public:
  using Error::Error;
};

class LogTraceMismatch : public Error {
 public:
  using Error::Error;
};

class CoverageMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownFixture : public Error {
 public:
  explicit UnknownFixture(const std::string& name)
      : Error("unknown fixture: " + name) {}
};

}  // namespace gts
