#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jigsaw3d {

// A caller broke a documented precondition (bad shape, out-of-range index,
// non-finite coordinate).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A configuration is inconsistent or incomplete (missing labels, bad
// hyperparameter, donor required but absent).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. line() is 1-based; 0 means "not tied to a line".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kCorrupt, kVersion };

  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Throws ContractViolation with `message` unless `condition` holds.
inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace jigsaw3d
