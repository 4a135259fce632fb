#pragma once

#include <stdexcept>
#include <string>

namespace prepbench {

/// Base class for all harness errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class IOError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class ColumnNotFound : public Error {
public:
  explicit ColumnNotFound(const std::string& column)
      : Error("column not found: " + column), column_(column) {}
  const std::string& column() const { return column_; }

private:
  std::string column_;
};

class TypeMismatch : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class UnknownEngine : public Error {
public:
  explicit UnknownEngine(const std::string& name) : Error("unknown engine: " + name) {}
};

class DuplicateEngine : public Error {
public:
  explicit DuplicateEngine(const std::string& name) : Error("engine already registered: " + name) {}
};

/// The adapter declares it cannot run the call, even via custom code.
class UnsupportedOperation : public Error {
public:
  using Error::Error;
};

/// A wrapped engine failure. `oom` marks allocation failures so the executor
/// can classify them separately from generic errors.
class EngineError : public Error {
public:
  explicit EngineError(const std::string& msg, bool oom = false) : Error(msg), oom_(oom) {}
  bool is_oom() const { return oom_; }

private:
  bool oom_ = false;
};

class IncomparableTargets : public Error {
public:
  using Error::Error;
};

class MissingBaseline : public Error {
public:
  using Error::Error;
};

class EmptyStage : public Error {
public:
  using Error::Error;
};

class RuntimeUnavailable : public Error {
public:
  using Error::Error;
};

class ImageBuildError : public Error {
public:
  using Error::Error;
};

class MissingTable : public Error {
public:
  explicit MissingTable(const std::string& table) : Error("missing TPC-H table file: " + table) {}
};

class SchemaMismatch : public Error {
public:
  using Error::Error;
};

class IncompleteResults : public Error {
public:
  using Error::Error;
};

}  // namespace prepbench
