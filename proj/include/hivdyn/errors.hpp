#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hivdyn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteInputError : public Error {
 public:
  using Error::Error;
};

// Pretreatment steady state has no persistent virus (R0 <= 1).
class InfeasibleSteadyStateError : public Error {
 public:
  using Error::Error;
};

// Integrator ran out of steps or the step size underflowed.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Integrator produced a non-finite state.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Model output could not be mapped to a log10 viral load.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class LinearAlgebraError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class JoinError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

// Unrecoverable failure inside the sampler; carries the iteration index.
class ChainAbort : public Error {
 public:
  ChainAbort(long iteration, const std::string& what)
      : Error("chain aborted at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

}  // namespace hivdyn
