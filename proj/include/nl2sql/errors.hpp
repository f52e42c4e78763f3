#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nl2sql {

// Base for every domain error. `kind` is a stable machine-readable tag used
// by the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error("SyntaxError", message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFeature : public Error {
 public:
  UnsupportedFeature(std::size_t offset, const std::string& message)
      : Error("UnsupportedFeature", message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("SchemaError", message) {}
};

class DeadStateError : public Error {
 public:
  DeadStateError() : Error("DeadState", "parser state is dead and admits no continuation") {}
};

class NoViableTokenError : public Error {
 public:
  explicit NoViableTokenError(const std::string& message) : Error("NoViableToken", message) {}
};

class MaxLengthExceededError : public Error {
 public:
  explicit MaxLengthExceededError(const std::string& message)
      : Error("MaxLengthExceeded", message) {}
};

class InsufficientCandidatesError : public Error {
 public:
  explicit InsufficientCandidatesError(const std::string& message)
      : Error("InsufficientCandidates", message) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& message) : Error("EmptyInput", message) {}
};

class SchemaMismatchError : public Error {
 public:
  explicit SchemaMismatchError(const std::string& message) : Error("SchemaMismatch", message) {}
};

class TypeError : public Error {
 public:
  explicit TypeError(const std::string& message) : Error("TypeError", message) {}
};

class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& message) : Error("SemanticError", message) {}
};

class NoSamplesError : public Error {
 public:
  explicit NoSamplesError(const std::string& message) : Error("NoSamples", message) {}
};

class UnknownVariantError : public Error {
 public:
  explicit UnknownVariantError(const std::string& message) : Error("UnknownVariant", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

}  // namespace nl2sql
