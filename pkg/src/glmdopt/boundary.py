"""Boundary-optimality analysis for two continuous factors.

Any rectangle of factor levels maps affinely onto the unit square with
adjusted coefficients that leave every linear predictor unchanged, so the
analysis runs on ``[-1, 1]^2``. The four corners alone support a D-optimal
design exactly when adding any fifth candidate point (a, b) cannot help,
which reduces to

    s(a, b) = (3/4) f(p4) - nu(b0 + a*b1 + b*b2) * h(a, b) >= 0

for all (a, b) in the square, where ``p4`` is the optimal corner allocation,
``f(p4)`` its objective, and ``h`` a quadratic form in (a, b) built from the
corner allocation and weights. ``min s`` is located by a dense grid followed
by bound-constrained quasi-Newton polish from the best node and from the
corners (the corner values sit exactly at zero for an interior-optimal
``p4``, so nascent interior dips start near them).

``p4`` always comes from the analytic four-point solver: the verdict
threshold is tiny relative to the objective, and a merely near-optimal
allocation shifts the corner values of ``s`` off zero by enough to corrupt
verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .design import Allocation
from .errors import DomainError
from .solver4 import solve_22
from .weights import WeightFunction

#: corner order of the unit square: matches the four-point solver convention
CORNERS = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])

#: verdict tolerance as a fraction of the corner objective
VERDICT_REL_TOL = 1e-10


@dataclass(frozen=True)
class ContinuousProblem:
    """Two continuous factors on a rectangle with known coefficients."""

    beta: np.ndarray  # (b0, b1, b2)
    bounds: tuple  # (a1, b1, a2, b2) with a_k < b_k
    weight_fn: WeightFunction

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        if beta.shape != (3,) or not np.all(np.isfinite(beta)):
            raise DomainError("beta must be three finite numbers (intercept and two slopes)")
        beta = beta.copy()
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        b = tuple(float(x) for x in self.bounds)
        if len(b) != 4 or not all(np.isfinite(x) for x in b):
            raise DomainError("bounds must be four finite numbers (lo1, hi1, lo2, hi2)")
        if not (b[0] < b[1] and b[2] < b[3]):
            raise DomainError("each factor needs lo < hi bounds")
        object.__setattr__(self, "bounds", b)


@dataclass(frozen=True)
class RescaleTransform:
    """Affine map between a factor rectangle and the unit square."""

    mid: np.ndarray  # rectangle midpoints
    half: np.ndarray  # rectangle halfwidths
    det_factor: float  # determinant of the model-matrix change of basis

    def to_unit(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.mid) / self.half

    def from_unit(self, points) -> np.ndarray:
        return self.mid + np.asarray(points, dtype=float) * self.half


@dataclass(frozen=True)
class BoundaryVerdict:
    """Outcome of the four-corner support check on the unit square."""

    boundary_optimal: bool
    min_s: float
    argmin: tuple  # (a, b) attaining min_s
    p4: Allocation  # optimal corner allocation, CORNERS order
    f_p4: float  # corner objective det(X' W X) at p4


@dataclass(frozen=True)
class RegionGrid:
    """Verdict and margin surfaces over a (beta1, beta2) grid."""

    beta0: float
    beta1: np.ndarray
    beta2: np.ndarray
    min_s: np.ndarray  # shape (len(beta1), len(beta2))
    verdict: np.ndarray  # bool, same shape
    failed: np.ndarray  # bool, nodes whose check raised


def rescale_problem(cp: ContinuousProblem) -> tuple[ContinuousProblem, RescaleTransform]:
    """Equivalent problem on the unit square, with the point map back.

    The adjusted coefficients absorb the shift and scaling so that the
    linear predictor at mapped points is unchanged; objectives transform by
    the squared determinant of the change of basis.
    """
    a1, b1, a2, b2 = cp.bounds
    mid = np.array([(a1 + b1) / 2.0, (a2 + b2) / 2.0])
    half = np.array([(b1 - a1) / 2.0, (b2 - a2) / 2.0])
    b0, be1, be2 = cp.beta
    beta_star = np.array([b0 + be1 * mid[0] + be2 * mid[1], be1 * half[0], be2 * half[1]])
    unit = ContinuousProblem(beta_star, (-1.0, 1.0, -1.0, 1.0), cp.weight_fn)
    return unit, RescaleTransform(mid, half, 1.0 / (half[0] * half[1]))


def corner_weights(beta, weight_fn: WeightFunction) -> np.ndarray:
    """Weights at the four unit-square corners, in CORNERS order."""
    beta = np.asarray(beta, dtype=float).reshape(-1)
    return np.asarray(weight_fn(beta[0] + CORNERS @ beta[1:]), dtype=float)


def h_ab(a, b, p4, w):
    """Quadratic form in (a, b) measuring the leverage of a fifth point.

    ``p4`` and ``w`` are the corner allocation and weights; a and b may be
    scalars or broadcastable arrays. Grouped as constant, b^2, 2b, a^2, 2a,
    and 2ab terms with products ``q_i q_j = (p_i w_i)(p_j w_j)``.
    """
    parr = p4.p if isinstance(p4, Allocation) else np.asarray(p4, dtype=float)
    q1, q2, q3, q4 = parr * np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    const = q1 * q2 + q1 * q3 + q2 * q4 + q3 * q4
    b_sq = q1 * q3 + q2 * q3 + q1 * q4 + q2 * q4
    b_lin = -q1 * q3 + q2 * q4
    a_sq = q1 * q2 + q2 * q3 + q1 * q4 + q3 * q4
    a_lin = -q1 * q2 + q3 * q4
    ab = q2 * q3 - q1 * q4
    out = const + b * b * b_sq + 2.0 * b * b_lin + a * a * a_sq + 2.0 * a * a_lin + 2.0 * a * b * ab
    return float(out) if out.ndim == 0 else out


def corner_objective(p4, w) -> float:
    """det(X' W X) for the unit-square corner design at allocation p4."""
    parr = p4.p if isinstance(p4, Allocation) else np.asarray(p4, dtype=float)
    q = parr * np.asarray(w, dtype=float)
    return 16.0 * float(q[0] * q[1] * q[2] + q[0] * q[1] * q[3] + q[0] * q[2] * q[3] + q[1] * q[2] * q[3])


def check_boundary_optimal(cp: ContinuousProblem, s_grid_steps: int = 201) -> BoundaryVerdict:
    """Decide whether the four corners alone support a D-optimal design.

    Requires a problem already on the unit square (use
    :func:`rescale_problem` first). The margin surface is scanned on an
    ``s_grid_steps`` x ``s_grid_steps`` grid and polished by L-BFGS-B from
    the best node and the four corners.
    """
    if tuple(cp.bounds) != (-1.0, 1.0, -1.0, 1.0):
        raise DomainError("problem must be rescaled to the unit square first")
    if s_grid_steps < 2:
        raise DomainError("s_grid_steps must be >= 2")
    w = corner_weights(cp.beta, cp.weight_fn)
    report = solve_22(1.0 / w)
    p4 = report.allocation
    f_p4 = corner_objective(p4, w)
    b0, b1, b2 = cp.beta
    fn = cp.weight_fn

    def s_of(a, b):
        return 0.75 * f_p4 - np.asarray(fn(b0 + a * b1 + b * b2)) * h_ab(a, b, p4, w)

    axis = np.linspace(-1.0, 1.0, s_grid_steps)
    A, B = np.meshgrid(axis, axis, indexing="ij")
    S = s_of(A, B)
    flat = int(np.argmin(S))
    best = (float(A.flat[flat]), float(B.flat[flat]))
    min_s = float(S.flat[flat])
    argmin = best

    def s_vec(x):
        return float(s_of(float(x[0]), float(x[1])))

    starts = [best] + [tuple(c) for c in CORNERS]
    for x0 in starts:
        res = optimize.minimize(
            s_vec,
            np.asarray(x0, dtype=float),
            method="L-BFGS-B",
            bounds=[(-1.0, 1.0), (-1.0, 1.0)],
            options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 200},
        )
        if np.isfinite(res.fun) and res.fun < min_s:
            min_s = float(res.fun)
            argmin = (float(res.x[0]), float(res.x[1]))

    tol_s = VERDICT_REL_TOL * f_p4
    return BoundaryVerdict(bool(min_s >= -tol_s), min_s, argmin, p4, f_p4)


def region_sweep(
    beta0: float,
    beta1_range: tuple,
    beta2_range: tuple,
    steps: int,
    weight_fn: WeightFunction,
    s_grid_steps: int = 201,
    threads: int = 1,
) -> RegionGrid:
    """Corner-support verdicts over a grid of slope pairs at fixed intercept.

    Nodes are independent; failures are recorded in the ``failed`` mask
    rather than aborting the sweep.
    """
    if steps < 1:
        raise DomainError("steps must be >= 1")
    b1v = np.linspace(beta1_range[0], beta1_range[1], steps) if steps > 1 else np.array(
        [0.5 * (beta1_range[0] + beta1_range[1])]
    )
    b2v = np.linspace(beta2_range[0], beta2_range[1], steps) if steps > 1 else np.array(
        [0.5 * (beta2_range[0] + beta2_range[1])]
    )
    pairs = [(i, j) for i in range(b1v.size) for j in range(b2v.size)]

    def node(idx):
        i, j = idx
        try:
            cp = ContinuousProblem(
                np.array([beta0, b1v[i], b2v[j]]), (-1.0, 1.0, -1.0, 1.0), weight_fn
            )
            verdict = check_boundary_optimal(cp, s_grid_steps=s_grid_steps)
            return verdict.min_s, verdict.boundary_optimal, False
        except Exception:
            return np.nan, False, True

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(node, pairs))
    else:
        results = [node(idx) for idx in pairs]

    min_s = np.empty((b1v.size, b2v.size))
    verdict = np.zeros((b1v.size, b2v.size), dtype=bool)
    failed = np.zeros((b1v.size, b2v.size), dtype=bool)
    for (i, j), (ms, ok, bad) in zip(pairs, results):
        min_s[i, j] = ms
        verdict[i, j] = ok
        failed[i, j] = bad
    return RegionGrid(float(beta0), b1v, b2v, min_s, verdict, failed)


# marching-squares edge pairs per cell code (corners: 1=SW, 2=SE, 4=NE, 8=NW;
# edges: S=0, E=1, N=2, W=3)
_MS_SEGMENTS = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    5: [(3, 2), (0, 1)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(0, 2)],
    10: [(0, 3), (1, 2)],
    11: [(1, 2)],
    12: [(1, 3)],
    13: [(0, 1)],
    14: [(0, 3)],
}


def region_boundary_segments(grid: RegionGrid):
    """Region-edge line segments via marching squares on the verdict field.

    Crossings are placed at edge midpoints (the margin surface changes scale
    across nodes, so interpolating on it would be unreliable). Returns a list
    of ((x1, y1), (x2, y2)) segments in (beta1, beta2) coordinates.
    """
    x, y = grid.beta1, grid.beta2
    v = grid.verdict
    segments = []
    for i in range(v.shape[0] - 1):
        for j in range(v.shape[1] - 1):
            code = (
                (1 if v[i, j] else 0)
                | (2 if v[i + 1, j] else 0)
                | (4 if v[i + 1, j + 1] else 0)
                | (8 if v[i, j + 1] else 0)
            )
            if code not in _MS_SEGMENTS:
                continue
            xm, ym = 0.5 * (x[i] + x[i + 1]), 0.5 * (y[j] + y[j + 1])
            edge_mid = {
                0: (xm, y[j]),
                1: (x[i + 1], ym),
                2: (xm, y[j + 1]),
                3: (x[i], ym),
            }
            for e1, e2 in _MS_SEGMENTS[code]:
                segments.append((edge_mid[e1], edge_mid[e2]))
    return segments


def count_boundary_pieces(grid: RegionGrid) -> int:
    """Number of connected components among the boundary segments."""
    segments = region_boundary_segments(grid)
    if not segments:
        return 0
    parent = list(range(len(segments)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    endpoints = {}
    for k, (p1, p2) in enumerate(segments):
        for pt in (p1, p2):
            key = (round(pt[0], 9), round(pt[1], 9))
            if key in endpoints:
                r1, r2 = find(endpoints[key]), find(k)
                if r1 != r2:
                    parent[r2] = r1
            else:
                endpoints[key] = k
    return len({find(k) for k in range(len(segments))})
