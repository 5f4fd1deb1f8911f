#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpn {

/// Machine-readable error category carried by every library exception.
enum class ErrorCode {
  domain,         // argument outside the mathematical domain of an operation
  configuration,  // grid / config cannot meet the declared tolerance
  numerical,      // an algorithm failed to produce a finite / certified answer
  parse,          // malformed input file
  schema,         // JSON document does not match the expected schema
  io,             // filesystem failure
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorCode::domain, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCode::configuration, m) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m) : Error(ErrorCode::numerical, m) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& m, long line)
      : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + m), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error(ErrorCode::schema, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCode::io, m) {}
};

}  // namespace kpn
