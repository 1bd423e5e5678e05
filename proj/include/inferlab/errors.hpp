#pragma once

#include <stdexcept>
#include <string>

namespace inferlab {

// Raised while parsing a scenario config; carries the 1-based offending line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  explicit ConfigError(const std::string& what)
      : std::runtime_error(what), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A scenario failed validate_scenario at a point where a valid one is required.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No control problem was accepted by the relevance predicate. Distinguished
// from an estimate of zero: the estimate simply does not exist.
class EmptyRelevantSet : public std::runtime_error {
 public:
  explicit EmptyRelevantSet(long long generated)
      : std::runtime_error("empty relevant set after " +
                           std::to_string(generated) + " generated controls"),
        generated_(generated) {}
  long long generated() const { return generated_; }

 private:
  long long generated_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace inferlab
