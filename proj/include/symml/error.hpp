#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "symml/keypath.hpp"

namespace symml {

// Root of every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI and by tests.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error("SchemaError", msg) {}
};

class DuplicateType : public Error {
 public:
  explicit DuplicateType(const std::string& type_name)
      : Error("DuplicateType", "type already registered: " + type_name) {}
};

class UnknownParent : public Error {
 public:
  explicit UnknownParent(const std::string& parent)
      : Error("UnknownParent", "parent type not registered: " + parent) {}
};

class UnknownType : public Error {
 public:
  explicit UnknownType(std::vector<std::string> names,
                       std::vector<std::string> manifest = {});

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::string>& manifest() const noexcept {
    return manifest_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::string> manifest_;
};

// Carries the location of the first offending node.
class ValidationError : public Error {
 public:
  ValidationError(KeyPath path, const std::string& reason)
      : Error("ValidationError", path.to_string() + ": " + reason),
        path_(std::move(path)),
        reason_(reason) {}

  const KeyPath& path() const noexcept { return path_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  KeyPath path_;
  std::string reason_;
};

class PathNotFound : public Error {
 public:
  PathNotFound(KeyPath path, const std::string& reason)
      : Error("PathNotFound", path.to_string() + ": " + reason),
        path_(std::move(path)) {}

  const KeyPath& path() const noexcept { return path_; }

 private:
  KeyPath path_;
};

class KeyPathSyntaxError : public Error {
 public:
  explicit KeyPathSyntaxError(const std::string& msg)
      : Error("KeyPathSyntaxError", msg) {}
};

class ConflictingUpdates : public Error {
 public:
  ConflictingUpdates(const KeyPath& outer, const KeyPath& inner)
      : Error("ConflictingUpdates", "update at " + outer.to_string() +
                                        " contains update at " +
                                        inner.to_string()) {}
};

class UnknownAttribute : public Error {
 public:
  UnknownAttribute(const std::string& type_name, const std::string& attr)
      : Error("UnknownAttribute",
              "type " + type_name + " has no derived attribute " + attr) {}
};

class UriSyntaxError : public Error {
 public:
  explicit UriSyntaxError(const std::string& msg)
      : Error("UriSyntaxError", msg) {}
};

class UnknownPatcher : public Error {
 public:
  explicit UnknownPatcher(const std::string& name)
      : Error("UnknownPatcher", "no patcher registered as " + name) {}
};

// Wraps whatever a patcher raised, tagging it with the patcher's name and
// position in the composition.
class PatcherError : public Error {
 public:
  PatcherError(std::string patcher, std::size_t index, std::string cause_kind,
               const std::string& cause)
      : Error("PatcherError", "patcher #" + std::to_string(index) + " (" +
                                  patcher + ") failed: " + cause),
        patcher_(std::move(patcher)),
        index_(index),
        cause_kind_(std::move(cause_kind)) {}

  const std::string& patcher() const noexcept { return patcher_; }
  std::size_t index() const noexcept { return index_; }
  const std::string& cause_kind() const noexcept { return cause_kind_; }

 private:
  std::string patcher_;
  std::size_t index_;
  std::string cause_kind_;
};

class SpecMismatch : public Error {
 public:
  explicit SpecMismatch(const std::string& msg) : Error("SpecMismatch", msg) {}
};

class InfiniteSpace : public Error {
 public:
  InfiniteSpace()
      : Error("InfiniteSpace", "search space is not finitely enumerable") {}
};

class Exhausted : public Error {
 public:
  Exhausted() : Error("Exhausted", "search space exhausted") {}
};

class SyntaxError : public Error {
 public:
  explicit SyntaxError(const std::string& msg) : Error("SyntaxError", msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("IoError", msg) {}
};

class HeadMismatch : public Error {
 public:
  HeadMismatch(std::int64_t units, std::int64_t num_classes)
      : Error("HeadMismatch",
              "head units " + std::to_string(units) +
                  " != dataset num_classes " + std::to_string(num_classes)) {}
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& msg)
      : Error("EvaluationError", msg) {}
};

}  // namespace symml
