"""Bound-constrained nonlinear solver with linear equality constraints.

The method of multipliers handles the equalities: each outer iteration
minimizes the augmented Lagrangian over the box with a projected quasi-Newton
(L-BFGS-B) inner solve, then updates the multipliers and, when the residual
stalls, the penalty. Every returned iterate respects the box exactly, and the
whole procedure is deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse

INITIAL_PENALTY = 10.0
PENALTY_GROWTH = 5.0
RESIDUAL_SHRINK = 4.0
PENALTY_CAP = 1e12


@dataclass
class LinearEquality:
    """One row a^T x = b with a given sparsely by index/coefficient pairs."""

    indices: np.ndarray
    coefficients: np.ndarray
    rhs: float

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int).ravel()
        self.coefficients = np.asarray(self.coefficients, dtype=float).ravel()
        if self.indices.shape != self.coefficients.shape:
            raise ValueError("equality indices and coefficients must align")
        if len(self.indices) == 0 or not np.any(self.coefficients):
            raise ValueError("equality row must have at least one nonzero")


@dataclass
class NlpProblem:
    """Minimize objective(x) -> (value, gradient) over a box with equalities."""

    dim: int
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]]
    lower: np.ndarray
    upper: np.ndarray
    equalities: Sequence[LinearEquality] = ()
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        if self.lower.shape != (self.dim,) or self.upper.shape != (self.dim,):
            raise ValueError("bounds must match the problem dimension")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bounds exceed upper bounds")
        if self.x0 is None:
            self.x0 = np.clip(np.zeros(self.dim), self.lower, self.upper)
        else:
            self.x0 = np.clip(np.asarray(self.x0, dtype=float).ravel(), self.lower, self.upper)

    def equality_matrix(self) -> tuple[scipy.sparse.csr_matrix, np.ndarray]:
        rows, cols, vals, rhs = [], [], [], []
        for r, eq in enumerate(self.equalities):
            rows.extend([r] * len(eq.indices))
            cols.extend(eq.indices.tolist())
            vals.extend(eq.coefficients.tolist())
            rhs.append(eq.rhs)
        a = scipy.sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(self.equalities), self.dim)
        )
        return a, np.asarray(rhs, dtype=float)


@dataclass
class SolveOptions:
    max_outer: int = 30
    max_inner: int = 200
    eq_tol: float = 1e-6
    grad_tol: float = 1e-6


@dataclass
class SolveReport:
    x_star: np.ndarray
    objective_value: float
    max_equality_residual: float
    iterations: int
    converged: bool
    wall_time: float
    # (merit at inner-solve start, merit at inner-solve end) per outer iterate,
    # both under that iterate's multipliers and penalty
    merit_history: list[tuple[float, float]] = field(default_factory=list)
    projected_gradient: float = float("nan")


def _projected_gradient_norm(x, grad, lower, upper) -> float:
    return float(np.abs(x - np.clip(x - grad, lower, upper)).max(initial=0.0))


def _projected_descent(
    problem: NlpProblem, x, f, g, max_steps: int = 8
) -> tuple[np.ndarray, float]:
    """A few Armijo-backtracked projected-gradient steps; always feasible."""
    for _ in range(max_steps):
        direction = np.clip(x - g, problem.lower, problem.upper) - x
        slope = float(g @ direction)
        if slope >= -1e-16:
            break
        step = 1.0
        accepted = False
        while step > 1e-12:
            x_try = np.clip(x + step * direction, problem.lower, problem.upper)
            f_try, g_try = problem.objective(x_try)
            if f_try <= f + 1e-4 * step * slope:
                x, f, g = x_try, f_try, g_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return x, float(f)


def solve(problem: NlpProblem, opts: SolveOptions | None = None) -> SolveReport:
    """Run the augmented-Lagrangian loop (or a single inner solve if unconstrained).

    ``converged`` requires both the equality residual and the projected
    gradient of the Lagrangian to be within tolerance; the best iterate is
    returned either way.
    """
    opts = opts or SolveOptions()
    t_start = time.perf_counter()
    x = problem.x0.copy()
    f0, g0 = problem.objective(x)
    if not np.isfinite(f0) or not np.all(np.isfinite(g0)):
        raise ValueError("objective is not finite at the initial point")

    bounds = list(zip(problem.lower, problem.upper))
    n_eq = len(problem.equalities)
    total_inner = 0
    merit_history: list[tuple[float, float]] = []

    if n_eq == 0:
        # without equalities the outer budget counts quasi-Newton restart
        # cycles; a restart clears stale curvature after an aborted line
        # search, with a few projected-gradient steps to move off the spot
        f_prev = f0
        pg = np.inf
        for _ in range(opts.max_outer):
            res = scipy.optimize.minimize(
                problem.objective,
                x,
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={
                    "maxiter": opts.max_inner,
                    "ftol": 1e-14,
                    "gtol": 0.1 * opts.grad_tol,
                    "maxls": 60,
                },
            )
            total_inner += int(res.nit)
            x = np.clip(res.x, problem.lower, problem.upper)
            f, g = problem.objective(x)
            merit_history.append((float(f_prev), float(f)))
            pg = _projected_gradient_norm(x, g, problem.lower, problem.upper)
            if pg <= opts.grad_tol:
                break
            x, f_next = _projected_descent(problem, x, f, g)
            if f_prev - f_next <= 1e-12 * (1.0 + abs(f_next)):
                break
            f_prev = f_next
        f, g = problem.objective(x)
        pg = _projected_gradient_norm(x, g, problem.lower, problem.upper)
        return SolveReport(
            x_star=x,
            objective_value=float(f),
            max_equality_residual=0.0,
            iterations=total_inner,
            converged=pg <= opts.grad_tol,
            wall_time=time.perf_counter() - t_start,
            merit_history=merit_history,
            projected_gradient=pg,
        )

    a_mat, b_vec = problem.equality_matrix()
    a_t = a_mat.T.tocsr()
    lam = np.zeros(n_eq)
    rho = INITIAL_PENALTY
    prev_residual = np.inf
    prev_merit_end = None
    pg = np.inf
    converged = False

    for _ in range(opts.max_outer):
        lam_k, rho_k = lam.copy(), rho

        def augmented(xv, lam_k=lam_k, rho_k=rho_k):
            f, g = problem.objective(xv)
            c = a_mat @ xv - b_vec
            value = f - lam_k @ c + 0.5 * rho_k * (c @ c)
            grad = g + a_t @ (rho_k * c - lam_k)
            return value, grad

        merit_start = augmented(x)[0]
        res = scipy.optimize.minimize(
            augmented,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": opts.max_inner, "ftol": 1e-14, "gtol": 0.1 * opts.grad_tol},
        )
        total_inner += int(res.nit)
        x = np.clip(res.x, problem.lower, problem.upper)
        merit_history.append((float(merit_start), float(res.fun)))

        c = a_mat @ x - b_vec
        residual = float(np.abs(c).max(initial=0.0))
        lam = lam - rho * c
        f, g = problem.objective(x)
        lagrangian_grad = g - a_t @ lam
        pg = _projected_gradient_norm(x, lagrangian_grad, problem.lower, problem.upper)
        if residual <= opts.eq_tol and pg <= opts.grad_tol:
            converged = True
            break
        merit_start, merit_end = merit_history[-1]
        stalled_inner = abs(merit_start - merit_end) <= 1e-14 * (1.0 + abs(merit_end))
        stalled_outer = (
            residual <= opts.eq_tol
            and prev_merit_end is not None
            and abs(merit_end - prev_merit_end) <= 1e-12 * (1.0 + abs(merit_end))
        )
        if stalled_outer or (stalled_inner and residual <= 10.0 * opts.eq_tol):
            break  # stop burning outer iterations on a stalled subproblem
        prev_merit_end = merit_end
        if residual > prev_residual / RESIDUAL_SHRINK:
            rho = min(rho * PENALTY_GROWTH, PENALTY_CAP)
        prev_residual = residual

    c = a_mat @ x - b_vec
    f, _ = problem.objective(x)
    return SolveReport(
        x_star=x,
        objective_value=float(f),
        max_equality_residual=float(np.abs(c).max(initial=0.0)),
        iterations=total_inner,
        converged=converged,
        wall_time=time.perf_counter() - t_start,
        merit_history=merit_history,
        projected_gradient=float(pg),
    )


def check_gradient(problem: NlpProblem, x, step: float = 1e-6) -> float:
    """Max relative error between the supplied gradient and central differences."""
    x = np.asarray(x, dtype=float)
    _, grad = problem.objective(x)
    fd = np.empty_like(grad)
    for i in range(problem.dim):
        e = np.zeros(problem.dim)
        e[i] = step
        f_plus, _ = problem.objective(x + e)
        f_minus, _ = problem.objective(x - e)
        fd[i] = (f_plus - f_minus) / (2.0 * step)
    denom = np.maximum(np.abs(fd), 1e-8)
    return float(np.max(np.abs(fd - grad) / denom))
