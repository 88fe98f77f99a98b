#pragma once

#include <stdexcept>
#include <string>

namespace votefuse {

/// Broad failure category. The CLI maps these onto exit codes.
enum class ErrorKind {
  usage,     // bad flags or configuration
  data,      // malformed or insufficient input data
  internal,  // anything else
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Raised while reading CSV / fixture input. Messages name the offending row.
class IngestionError : public DataError {
public:
  explicit IngestionError(const std::string& what) : DataError(what) {}
};

}  // namespace votefuse
