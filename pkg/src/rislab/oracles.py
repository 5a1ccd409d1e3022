"""Slow, independent reference computations used to validate the fast paths.

These functions deliberately avoid the closed forms in the rest of the
package: dissipation is taken as a supremum over nested partitions, and the
elastic-set distance comes from a dual direction sweep.  They exist so the
test suite can freeze reference values that do not share code with the
implementations under test.
"""

from __future__ import annotations

import numpy as np

from .kernels import Dissipation
from .paths import PiecewisePath, merge_breakpoints


def dissipation_by_refinement(
    R: Dissipation, z: PiecewisePath, t1: float, t2: float, levels: int = 12
) -> float:
    """Supremum over nested partitions of the summed increment costs.

    Each level-k partition is the dyadic grid with 2^k cells joined with the
    path's breakpoints, so the sequence of partition sums is nondecreasing.
    """
    if t2 <= t1:
        return 0.0
    inner = [float(t) for t in z.breakpoints if t1 < float(t) < t2]
    best = 0.0
    for k in range(levels + 1):
        pts = merge_breakpoints(np.linspace(t1, t2, 2**k + 1), inner)
        total = 0.0
        prev = z(t1)
        for t in pts[1:]:
            cur = z(float(t))
            total += R(cur - prev)
            prev = cur
        best = max(best, total)
    return best


def _unit_directions(d: int, n: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    # generalized Fibonacci lattice on the sphere for d = 3
    if d == 3:
        i = np.arange(n) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / n)
        theta = np.pi * (1.0 + np.sqrt(5.0)) * i
        return np.column_stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
        )
    rng = np.random.default_rng(12345)
    dirs = rng.normal(size=(n, d))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def elastic_distance_by_duality(
    R: Dissipation, eta, n_dirs: int = 20000
) -> float:
    """Distance of eta to the elastic set via the dual formula.

    The scaled distance tau * dist(eta, elastic set) equals the supremum of
    <eta, v> - R(v) over the ball ||v|| <= tau; by 1-homogeneity it suffices
    to sweep unit directions and clip at zero.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    dirs = _unit_directions(eta.size, n_dirs)
    vals = dirs @ eta - np.array([R(v) for v in dirs])
    return float(max(np.max(vals), 0.0))
