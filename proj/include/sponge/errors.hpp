#ifndef SPONGE_ERRORS_HPP
#define SPONGE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace sponge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation with a documented domain.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Mesh is not a valid closed manifold, or a quality check failed.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Geometry does not fit the simulation domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested mesh would exceed the configured node budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Linear or nonlinear solver did not converge.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double final_residual,
              std::vector<double> history = {})
      : Error(what), final_residual_(final_residual),
        history_(std::move(history)) {}

  double final_residual() const noexcept { return final_residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  double final_residual_;
  std::vector<double> history_;
};

/// Configuration parse or validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sponge

#endif  // SPONGE_ERRORS_HPP
