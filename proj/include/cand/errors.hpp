#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cand {

/// Malformed input text (log line, DBC stanza, recipe line, ...).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : std::move(msg)),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A trace or series too short for the requested statistic.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally invalid domain object (overlapping signals, bad bit walk, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cand
