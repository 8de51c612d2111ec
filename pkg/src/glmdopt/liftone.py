"""Lift-one coordinate ascent for the D-optimality objective.

The objective is multilinear in the allocation: every monomial is a product
of distinct coordinates. Restricting it to the lift-one path that moves
coordinate i to z while rescaling the rest proportionally gives

    f_i(z) = alpha * z * (1 - z)^(d-1) + beta * (1 - z)^d,

with d the number of model terms, so two evaluations pin the whole profile:
``beta = f_i(0)`` and ``alpha = 2^d f_i(1/2) - beta``. Each step maximizes
the profile exactly (interior stationary point against the z=0 endpoint) and
a sweep cycles the coordinates in a fixed order; convergence is declared on
the relative objective improvement of a full sweep.

This is the numerical baseline the analytic solvers are cross-checked
against, and the general-matrix solver for shapes outside the analytic
families.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .design import (
    Allocation,
    DesignProblem,
    SolveReport,
    objective_det,
    objective_expansion,
)
from .errors import DomainError

#: compile the subset expansion as the evaluator when it has at most this many terms
_EXPANSION_TERM_LIMIT = 64


@dataclass(frozen=True)
class LiftOneConfig:
    """Stopping rule and initialization for the coordinate ascent."""

    tol: float = 1e-12
    max_sweeps: int = 500
    init: str = "uniform"  # "uniform" or "user"
    init_p: np.ndarray | None = None
    order: str = "fixed"  # "fixed" (1..n) or "random" (seeded shuffle per sweep)
    seed: int | None = None

    def __post_init__(self):
        if not self.tol > 0.0:
            raise DomainError("tol must be positive")
        if self.max_sweeps < 1:
            raise DomainError("max_sweeps must be >= 1")
        if self.init not in ("uniform", "user"):
            raise DomainError("init must be 'uniform' or 'user'")
        if self.init == "user" and self.init_p is None:
            raise DomainError("init='user' requires init_p")
        if self.order not in ("fixed", "random"):
            raise DomainError("order must be 'fixed' or 'random'")


@dataclass(frozen=True)
class MultilinearObjective:
    """A homogeneous multilinear objective given directly as a callable.

    ``fn(p)`` must be a degree-``degree`` polynomial in which every monomial
    is a product of distinct coordinates (the shape the profile trick
    requires); ``n_points`` is the allocation length.
    """

    fn: Callable[[np.ndarray], float]
    n_points: int
    degree: int


def _as_objective(problem) -> MultilinearObjective:
    if isinstance(problem, MultilinearObjective):
        return problem
    if isinstance(problem, DesignProblem):
        n, d = problem.X.shape
        if np.linalg.matrix_rank(problem.X) < d:
            raise DomainError("X must have full column rank")
        if comb(n, d) <= _EXPANSION_TERM_LIMIT:
            terms = objective_expansion(problem, max_points=n)
            idx = np.array([t[0] for t in terms], dtype=int)
            coeff = np.array([t[1] for t in terms])

            def fn(p: np.ndarray) -> float:
                return float(coeff @ np.prod(p[idx], axis=1))

        else:

            def fn(p: np.ndarray) -> float:
                return objective_det(problem, p)

        return MultilinearObjective(fn, n, d)
    raise DomainError(f"cannot interpret {type(problem).__name__} as an objective")


def _profile(obj: MultilinearObjective, p: np.ndarray, i: int) -> tuple[float, float]:
    if p[i] >= 1.0:
        raise DomainError("degenerate profile: coordinate already carries all mass")
    shrink = 1.0 / (1.0 - p[i])
    q = p * shrink
    q[i] = 0.0
    beta = obj.fn(q)
    q = p * (0.5 * shrink)
    q[i] = 0.5
    alpha = 2.0**obj.degree * obj.fn(q) - beta
    return alpha, beta


def fi_profile(problem, p, i: int) -> tuple[float, float]:
    """Profile coefficients (alpha, beta) of coordinate i at allocation p.

    ``f_i(z) = alpha * z(1-z)^(d-1) + beta * (1-z)^d`` reproduces the
    objective along the lift-one path of coordinate i.
    """
    obj = _as_objective(problem)
    arr = p.p if isinstance(p, Allocation) else np.asarray(p, dtype=float)
    if arr.shape != (obj.n_points,):
        raise DomainError(f"allocation has length {arr.size}, expected {obj.n_points}")
    if not 0 <= i < obj.n_points:
        raise DomainError(f"coordinate {i} out of range")
    return _profile(obj, arr.copy(), i)


def profile_value(alpha: float, beta: float, degree: int, z: float) -> float:
    """Evaluate the lift-one profile at z."""
    return alpha * z * (1.0 - z) ** (degree - 1) + beta * (1.0 - z) ** degree


def _best_step(alpha: float, beta: float, degree: int) -> tuple[float, float]:
    """Maximizer of the profile on [0, 1] and its value."""
    best_z, best_val = 0.0, beta
    denom = degree * (alpha - beta)
    if denom != 0.0:
        z = (alpha - degree * beta) / denom
        if 0.0 < z < 1.0:
            val = profile_value(alpha, beta, degree, z)
            if val > best_val:
                best_z, best_val = z, val
    if degree == 1 and alpha > best_val:
        best_z, best_val = 1.0, alpha
    return best_z, best_val


def liftone_maximize(problem, config: LiftOneConfig | None = None) -> SolveReport:
    """Coordinate-ascent maximizer of a multilinear design objective.

    Accepts a :class:`DesignProblem` (full column rank required) or a
    :class:`MultilinearObjective`. Each coordinate step is an exact
    one-dimensional maximization, so the objective never decreases; sweeps
    stop once a full pass improves it by less than ``tol`` relative.
    """
    cfg = config or LiftOneConfig()
    obj = _as_objective(problem)
    n = obj.n_points

    if cfg.init == "user":
        p = Allocation(cfg.init_p).p.copy()
        if p.size != n:
            raise DomainError(f"init_p has length {p.size}, expected {n}")
    else:
        p = np.full(n, 1.0 / n)

    f = obj.fn(p)
    if not np.isfinite(f) or f <= 0.0:
        raise DomainError("degenerate objective: value is zero at the starting allocation")

    rng = np.random.default_rng(cfg.seed) if cfg.order == "random" else None
    sweeps = 0
    converged = False
    last_rel = np.inf
    for sweeps in range(1, cfg.max_sweeps + 1):
        f_start = f
        order = rng.permutation(n) if rng is not None else range(n)
        for i in order:
            alpha, beta = _profile(obj, p, i)
            z, val = _best_step(alpha, beta, obj.degree)
            if val <= f:
                continue
            p *= (1.0 - z) / (1.0 - p[i])
            p[i] = z
            drift = p.sum()
            if abs(drift - 1.0) > 1e-13:
                p /= drift
            f = val
        f = obj.fn(p)
        last_rel = (f - f_start) / f if f > 0.0 else 0.0
        if last_rel <= cfg.tol:
            converged = True
            break

    diag = {
        "sweeps": float(sweeps),
        "converged": 1.0 if converged else 0.0,
        "last_rel_improvement": float(last_rel),
    }
    return SolveReport(Allocation(p), f, "liftone", diag)
