#pragma once

#include <stdexcept>
#include <string>

namespace avdiar {

// Base class for all toolkit errors. Data problems (bad files, bad arguments,
// violated invariants) throw Error or a subclass; they never abort.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed text input. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace avdiar
