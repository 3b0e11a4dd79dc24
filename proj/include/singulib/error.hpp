#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace singulib {

enum class ErrorKind {
  Syntax,
  Domain,
  Overflow,
  DivisionByZero,
  InvalidArgument,
  Convergence,
  Classification,
  HypothesisViolated,
  Config,
};

const char* to_string(ErrorKind kind);

/// Base error for every failure the library reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure; `offset` is the byte offset into the source text.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(ErrorKind::Syntax, message + " at offset " + std::to_string(offset)),
        offset_(offset),
        message_(message) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

}  // namespace singulib
