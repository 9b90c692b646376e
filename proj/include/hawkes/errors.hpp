#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hawkes {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations: bad parameters, out-of-domain arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Numerical failures (divergence, coarse meshes, truncation problems).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NormUndefined : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverDivergence : public NumericalError {
 public:
  SolverDivergence(std::size_t node, const std::string& what)
      : NumericalError(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class MeshTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConditioningImpossible : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Thinning on a kernel whose local bound cannot be established.
class BoundInvalid : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Runaway branching in a simulator.
class ExplosionError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration documents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline void require(bool ok, const char* message) {
  if (!ok) throw InvalidArgument(message);
}
inline void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}
}  // namespace detail

}  // namespace hawkes
