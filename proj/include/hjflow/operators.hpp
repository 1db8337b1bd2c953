#pragma once

#include <stdexcept>
#include <string>

#include "hjflow/field.hpp"

namespace hjflow {

/// Raised when an iterative solve hits its iteration cap or a discrete
/// problem loses a property it must have (e.g. positivity).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0;  // max-norm residual in equation units
};

/// Discrete Neumann Laplacian. On flat faces and convex corners this is the
/// 3-/5-point stencil with mirrored ghost values.
Field laplacian_apply(const Grid& grid, const Field& f);

/// Central differences; a component closed by a Neumann face mirrors the
/// interior value and therefore vanishes.
VectorField gradient(const Grid& grid, const Field& f);

/// Solves (I - alpha * Lap_h) v = rhs.
/// 1D: tridiagonal elimination. 2D: unpreconditioned conjugate gradients on
/// the weight-symmetrised system, stopping at residual <= tol * (1 + |rhs|_inf)
/// with a cap of 10 * node count iterations.
Field solve_helmholtz(const Grid& grid, double alpha, const Field& rhs, SolveStats* stats = nullptr,
                      double tol = 1e-10, const Field* initial_guess = nullptr);

/// Positive solution of -Lap psi = 1 with d psi/d nu = -K psi.
Field solve_robin_aux(const GridPtr& grid, double K);

/// Mean-zero solution of -Lap_h v = rhs for mean-zero rhs (pure Neumann).
Field solve_neumann_poisson(const GridPtr& grid, const Field& rhs, double tol = 1e-12);

}  // namespace hjflow
