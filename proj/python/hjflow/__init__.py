"""Neumann viscous Hamilton-Jacobi solver: grids, operators and experiment runner."""

from ._core import (
    Grid,
    discrete_lambda,
    fit_log_linear,
    gradient,
    heat_semigroup,
    laplacian,
    run_experiment,
    second_neumann_eigenvalue,
    solve_helmholtz,
    solve_robin_aux,
)

__all__ = [
    "Grid",
    "discrete_lambda",
    "fit_log_linear",
    "gradient",
    "heat_semigroup",
    "laplacian",
    "run_experiment",
    "second_neumann_eigenvalue",
    "solve_helmholtz",
    "solve_robin_aux",
]
