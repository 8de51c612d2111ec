"""Shared oracles and generators for the test suite."""

import numpy as np
import pytest

from glmdopt import vform_objective


def simplex_grid_max(fn, n: int, grid: int = 15, rounds: int = 8):
    """Brute-force maximizer over the probability simplex: zooming grid scan.

    Independent of every solver under test: scans a product grid clipped to
    the simplex and shrinks the box around the best point each round.
    """
    center = np.full(n, 1.0 / n)
    width = 1.0
    best_p, best_f = center, fn(center)
    for _ in range(rounds):
        axes = [
            np.linspace(max(0.0, c - width / 2), min(1.0, c + width / 2), grid) for c in center
        ]
        mesh = np.meshgrid(*axes[:-1], indexing="ij")
        stack = np.stack([m.ravel() for m in mesh], axis=1)
        last = 1.0 - stack.sum(axis=1)
        ok = last >= -1e-12
        stack = np.column_stack([stack[ok], np.clip(last[ok], 0.0, None)])
        for p in stack:
            f = fn(p)
            if f > best_f:
                best_f, best_p = f, p
        center = best_p
        width *= 0.35
    return best_p, best_f


def random_interior_v4(rng, lo: float = 0.05, hi: float = 10.0, min_gap: float = 1e-6):
    """A strictly ordered 4-vector inside the interior-case region."""
    while True:
        v = np.sort(rng.uniform(lo, hi, 4))
        if v[3] >= v[0] + v[1] + v[2]:
            continue
        if np.min(np.diff(v)) < min_gap * v[3]:
            continue
        return v


def random_feasible(rng, n: int) -> np.ndarray:
    """A random point of the probability simplex."""
    p = rng.dirichlet(np.ones(n))
    return p / p.sum()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20260810))


def vform_max_oracle(v, grid: int = 15, rounds: int = 8):
    """Grid-search maximum of the reduced objective for coefficients v."""
    varr = np.asarray(v, dtype=float)
    return simplex_grid_max(lambda p: vform_objective(varr, p), varr.size, grid, rounds)
