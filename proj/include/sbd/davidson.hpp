#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sbd/dense.hpp"

namespace sbd {

/// y = H x. Implementations must overwrite y entirely.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct DavidsonOptions {
  int n_roots = 1;
  double tol_residual = 1e-8;
  int max_iters = 200;
  int max_subspace = 32;
  int restart_keep = 4;
  double precond_delta = 1e-6;
  bool reorthogonalize = true;
  std::uint64_t seed = 0x5bd1e995;  ///< random restart vectors after breakdown

  /// Throws ContractError unless 1 <= n_roots <= restart_keep <= max_subspace, max_subspace >= 2,
  /// tol_residual > 0, precond_delta > 0 and max_iters >= 1.
  void validate() const;
};

struct DavidsonIteration {
  int iteration = 0;
  int subspace_size = 0;
  std::vector<double> ritz_values;     ///< lowest min(k, n_roots)
  std::vector<double> residual_norms;  ///< per root
  double theta_change = 0.0;           ///< |theta_0^(k) - theta_0^(k-1)|
  double orthogonality_error = 0.0;    ///< ||V^T V - I||_F
  bool restarted = false;              ///< a thick restart followed this iteration
};

struct RestartEvent {
  int iteration = 0;
  double theta_before = 0.0;
  double theta_after = 0.0;
};

struct DavidsonStats {
  std::vector<DavidsonIteration> history;
  std::vector<double> apply_seconds;  ///< wall time of every operator application
  std::vector<RestartEvent> restarts;
  int breakdowns = 0;  ///< correction vectors annihilated by orthogonalization
};

struct DavidsonResult {
  std::vector<double> energies;
  std::vector<std::vector<double>> eigenvectors;  ///< unit norm
  std::vector<double> residual_norms;
  int iterations = 0;
  bool converged = false;
  DavidsonStats stats;
};

/// Lowest `opts.n_roots` eigenpairs of the symmetric operator `apply` of
/// dimension diag.size(). `x0` (optional) seeds the search space; otherwise the
/// unit vector(s) on the smallest diagonal entries are used.
DavidsonResult davidson_solve(const LinearOperator& apply, std::span<const double> diag,
                              std::span<const double> x0, const DavidsonOptions& opts);

/// Modified Gram-Schmidt of `t` against the orthonormal set `basis`, with a
/// second full pass when `reorth`. Returns the normalized remainder, or nullopt
/// when its norm falls below 1e-12 * ||t|| (or t is zero).
std::optional<std::vector<double>> orthogonalize(std::span<const double> t,
                                                 const std::vector<std::vector<double>>& basis,
                                                 bool reorth);

/// t_i = r_i / (sign(d_i - theta) * max(|d_i - theta|, delta)), sign(0) = +1.
std::vector<double> precondition(std::span<const double> r, std::span<const double> diag,
                                 double theta, double delta);

/// Eigen-decomposition of the small projected matrix (ascending).
inline SymmetricEigen projected_eigensolve(const DenseMatrix& t) { return jacobi_eigensolve(t); }

}  // namespace sbd
