#pragma once

#include <stdexcept>
#include <string>

namespace specdec {

// Malformed input files (vocab, corpus, model dumps, OCM tables, logs).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Filesystem-level failures (missing path, unwritable output).
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state the engine must never reach; indicates a bug, not bad input.
class InvariantError : public std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace specdec
