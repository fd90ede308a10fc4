#pragma once

#include <stdexcept>
#include <string>

namespace exdir {

// Malformed input text (edge lists, deletion streams, JSON). Carries a
// 1-based line number when one is known.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + std::move(msg)
                                    : std::move(msg)),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

// Vertex or edge id outside the owning graph.
class BoundsError : public std::out_of_range {
public:
  explicit BoundsError(const std::string& msg) : std::out_of_range(msg) {}
};

// A documented precondition was violated by the caller.
class ContractViolation : public std::logic_error {
public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Exact checks requested on an instance too large to enumerate.
class SizeError : public std::invalid_argument {
public:
  explicit SizeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// The deletion budget 4/psi * |Pi^-1(D)| < e(G)/14 of a pruning instance
// would be breached. Callers either stop or rebuild from scratch.
class BudgetExceeded : public std::runtime_error {
public:
  explicit BudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

// The randomized cut-matching oracle could not satisfy its own contract
// (fake budget exhausted, infeasible witness parameters).
class OracleFailure : public std::runtime_error {
public:
  explicit OracleFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the dynamic decomposition when the deletion counter reaches the
// restart threshold; maintain() catches it and recomputes from scratch.
class RestartRequired : public std::runtime_error {
public:
  explicit RestartRequired(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace exdir
