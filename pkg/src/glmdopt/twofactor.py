"""Analytic D-optimal allocation for four distinct points of a two-factor model.

For a 4x3 design matrix the objective factors through the four 3x3
leave-one-row-out minors:

    det(X' W X) = w1 w2 w3 w4 * (u1 p2 p3 p4 + u2 p1 p3 p4 + u3 p1 p2 p4
                                 + u4 p1 p2 p3),

with ``u_i = minor_i^2 / w_i`` (minor_i deletes row i). Unlike the two-level
case the ``u_i`` can vanish, which drives the dispatch:

* all minors zero (rank 2): the objective is identically zero and every
  allocation is optimal; the uniform one is reported as the canonical,
  permutation-equivariant choice;
* exactly one zero (one row in the span of two others): rational closed
  forms on the sorted coefficients;
* all positive: the four-point reduced-objective solver applies verbatim
  with ``v := u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import Allocation, DesignProblem, SolveReport, objective_det, vform_objective
from .errors import DomainError
from .solver4 import _one_zero_sorted, _support_kkt, solve_22

#: a minor counts as zero below this fraction of the largest |minor|
MINOR_ZERO_REL = 1e-12


@dataclass(frozen=True)
class UCoefficients:
    """Minor-based reduced coefficients of a 4x3 problem, in input order."""

    u: np.ndarray
    minors: np.ndarray
    perm: np.ndarray  # ascending sort of u
    rank_case: str  # "rank2" | "rank3_one_zero" | "rank3_general"


def compute_u(problem: DesignProblem) -> UCoefficients:
    """Reduced coefficients from the leave-one-row-out minors of a 4x3 X."""
    X = problem.X
    if X.shape != (4, 3):
        raise DomainError(f"need a 4x3 design matrix, got {X.shape}")
    minors = np.array([np.linalg.det(np.delete(X, i, axis=0)) for i in range(4)])
    mmax = np.max(np.abs(minors))
    zero = np.abs(minors) <= MINOR_ZERO_REL * mmax if mmax > 0.0 else np.ones(4, dtype=bool)
    n_zero = int(zero.sum())
    if n_zero == 0:
        rank_case = "rank3_general"
    elif n_zero == 1:
        rank_case = "rank3_one_zero"
    else:
        # Two or three near-zero minors cannot happen for distinct rows with
        # an intercept column except through roundoff on a rank-2 matrix.
        rank_case = "rank2"
        zero = np.ones(4, dtype=bool)
    u = np.where(zero, 0.0, minors * minors / problem.w)
    perm = np.argsort(u, kind="stable")
    return UCoefficients(u, minors, perm, rank_case)


def solve_fourpoint(problem: DesignProblem) -> SolveReport:
    """Optimal allocation for any four distinct two-factor design points.

    The reported objective is ``det(X' W X)``; diagnostics include the
    reduced-coefficient objective and, where defined, the support-restricted
    first-order gap.
    """
    uc = compute_u(problem)
    if uc.rank_case == "rank2":
        alloc = Allocation.uniform(4)
        return SolveReport(alloc, 0.0, "degenerate-rank2", {"reduced_objective": 0.0})

    if uc.rank_case == "rank3_one_zero":
        s = uc.u[uc.perm]
        p_sorted, suffix = _one_zero_sorted(s)
        label = f"twofactor-{suffix}"
        diag = {"kkt_residual": _support_kkt(s, p_sorted)}
        p = np.empty(4)
        p[uc.perm] = p_sorted
        alloc = Allocation(p)
        reduced = vform_objective(uc.u, p)
    else:
        report = solve_22(uc.u)
        label = report.case_label.replace("2x2", "twofactor")
        diag = dict(report.diagnostics)
        alloc = report.allocation
        reduced = report.objective

    diag["reduced_objective"] = reduced
    objective = objective_det(problem, alloc)
    return SolveReport(alloc, objective, label, diag)
