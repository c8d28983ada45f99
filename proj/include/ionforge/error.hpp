#pragma once

#include <stdexcept>
#include <string>

namespace ionforge {

/// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  usage = 1,    ///< bad arguments, inconsistent shapes
  numeric = 2,  ///< convergence failure, instability, divergence
  io = 3,       ///< missing/corrupt files, schema mismatch
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::numeric, what + " (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

/// The chain buckles into a zigzag: some transverse eigenvalue is non-positive.
struct InstabilityError : Error {
  explicit InstabilityError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Normalization of an all-zero graph or control.
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace ionforge
