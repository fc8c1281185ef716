#pragma once

#include <stdexcept>
#include <string>

namespace ownrecon {

enum class ErrorKind {
  shape,
  data_integrity,
  configuration,
  capability,
  domain,
  format,
  usage,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::data_integrity: return "data-integrity";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::capability: return "capability";
    case ErrorKind::domain: return "domain";
    case ErrorKind::format: return "format";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base of every error the library throws; `kind()` is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};
struct DataIntegrityError : Error {
  explicit DataIntegrityError(const std::string& what) : Error(ErrorKind::data_integrity, what) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::configuration, what) {}
};
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& what) : Error(ErrorKind::capability, what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Format errors carry the name of the offending header field or block.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& what)
      : Error(ErrorKind::format, "[" + field + "] " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace ownrecon
