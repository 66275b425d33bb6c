#pragma once

#include <stdexcept>
#include <string>

namespace basinctl {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model evaluation or derivative produced NaN/Inf.
struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& msg) : Error(msg) {}
};

/// Parameters outside the model's domain (e.g. Hill half-activation <= 0).
struct ParamDomainError : Error {
  explicit ParamDomainError(const std::string& msg) : Error(msg) {}
};

/// Multistart root search found no converged root.
struct NoEquilibriumFoundError : Error {
  explicit NoEquilibriumFoundError(const std::string& msg) : Error(msg) {}
};

/// Warm-started continuation failed to converge or the root jumped.
struct ContinuationLostError : Error {
  explicit ContinuationLostError(const std::string& msg) : Error(msg) {}
};

/// Continuation converged but the equilibrium changed stability class.
struct ClassificationChangedError : Error {
  explicit ClassificationChangedError(const std::string& msg) : Error(msg) {}
};

/// Eigenpair matching could not pick a clear winner.
struct AmbiguousMatchError : Error {
  AmbiguousMatchError(const std::string& msg, int best, int second)
      : Error(msg), best_index(best), second_index(second) {}
  int best_index;
  int second_index;
};

/// Equilibrium Jacobian too ill-conditioned for sensitivity solves.
struct SingularJacobianError : Error {
  explicit SingularJacobianError(const std::string& msg) : Error(msg) {}
};

/// Eigenvalue not simple; Lemma-style perturbation formula invalid.
struct DegenerateEigenvalueError : Error {
  explicit DegenerateEigenvalueError(const std::string& msg) : Error(msg) {}
};

/// Left/right eigenvector pair nearly orthogonal (w^T v ~ 0).
struct NearOrthogonalPairError : Error {
  explicit NearOrthogonalPairError(const std::string& msg) : Error(msg) {}
};

/// Cone projection zeroed every coordinate; no admissible direction.
struct EmptyProjectionError : Error {
  explicit EmptyProjectionError(const std::string& msg) : Error(msg) {}
};

/// Config file failed schema validation.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Equilibrium selector matched zero or multiple equilibria.
struct SelectorError : Error {
  explicit SelectorError(const std::string& msg) : Error(msg) {}
};

}  // namespace basinctl
