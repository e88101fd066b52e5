#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace claimrev {

// Base for every error the library raises. The CLI maps ValidationError to
// exit code 1 and FormatError / IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input is well-formed but violates a contract (dangling ids, bad config,
// single-class training data, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input cannot be decoded. Carries the line (text formats) or byte offset
// (binary formats) where decoding failed.
class FormatError : public Error {
 public:
  enum class Unit { line, byte };

  FormatError(const std::string& what, Unit unit, std::uint64_t position)
      : Error(what + (unit == Unit::line ? " (line " : " (byte offset ") +
              std::to_string(position) + ")"),
        unit_(unit),
        position_(position) {}

  Unit unit() const noexcept { return unit_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  Unit unit_;
  std::uint64_t position_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace claimrev
