#pragma once

#include <stdexcept>
#include <string>

namespace lpm {

/// Base class for all library failures. Subtypes split into usage errors
/// (bad input, exit code 1 in the CLI) and mathematical failures
/// (hypothesis of a theorem not satisfied, exit code 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematical failure: the requested object does not exist / cannot be
/// certified under the given data.
class MathError : public Error {
 public:
  using Error::Error;
};

class GapFails : public MathError {
 public:
  using MathError::MathError;
};

class NotSplit : public MathError {
 public:
  using MathError::MathError;
};

class TailTooLarge : public MathError {
 public:
  using MathError::MathError;
};

class NonContraction : public MathError {
 public:
  using MathError::MathError;
};

class NoConvergence : public MathError {
 public:
  using MathError::MathError;
};

class IllConditioned : public MathError {
 public:
  using MathError::MathError;
};

class Overflow : public MathError {
 public:
  using MathError::MathError;
};

class ZeroConditionViolated : public Error {
 public:
  using Error::Error;
};

class NonBlockDiagonal : public Error {
 public:
  using Error::Error;
};

class OutOfWindow : public Error {
 public:
  using Error::Error;
};

}  // namespace lpm
