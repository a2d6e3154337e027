#ifndef GRAPHSEG_ERROR_HPP
#define GRAPHSEG_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace graphseg {

// Violated precondition on an argument (basis mismatch, bad data, ...).
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not expressible in the requested basis.
class unsupported_operation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// No graph-valid path exists for the data.
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the source name and 1-based line.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line),
        detail_(what) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string detail_;
};

}  // namespace graphseg

#endif  // GRAPHSEG_ERROR_HPP
