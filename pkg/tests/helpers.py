"""Shared random generators for the test suite.

Random problems and candidate solutions are built by reverse engineering:
pick the state path first, then choose a load that makes it an exact solution
(or an exact violator), so expected checker outcomes are known by design.
"""

from __future__ import annotations

import numpy as np

from rislab import (
    Dissipation,
    EnergyModel,
    LipschitzPath,
    ParametrizedTuple,
    PiecewisePath,
    RISProblem,
    make_energy,
    polyhedral,
    scaled_norm,
    weighted_l1,
)


def random_spd(rng: np.random.Generator, d: int) -> np.ndarray:
    Q = rng.normal(size=(d, d))
    return Q @ Q.T + d * np.eye(d)


def random_kernel(rng: np.random.Generator, d: int) -> Dissipation:
    kind = rng.choice(["scaled_norm", "weighted_l1", "polyhedral"])
    if kind == "scaled_norm":
        return scaled_norm(float(rng.uniform(0.3, 2.0)))
    if kind == "weighted_l1":
        return weighted_l1(rng.uniform(0.3, 2.0, size=d))
    if d == 1:
        return polyhedral([[-float(rng.uniform(0.5, 2.0))], [float(rng.uniform(0.5, 2.0))]])
    if d == 2:
        m = int(rng.integers(3, 7))
        ang = np.sort(rng.uniform(0.0, 2 * np.pi, size=m))
        radii = rng.uniform(0.5, 2.0, size=m)
        verts = np.column_stack([radii * np.cos(ang), radii * np.sin(ang)])
    else:
        m = int(rng.integers(d + 1, d + 4))
        verts = rng.normal(size=(m, d))
        verts *= (rng.uniform(0.5, 2.0, size=m) / np.linalg.norm(verts, axis=1))[:, None]
    # symmetrizing the vertex set keeps 0 in the interior of the hull
    return polyhedral(np.vstack([verts, -verts]))


def random_breakpoints(rng: np.random.Generator, a: float, b: float, k: int) -> np.ndarray:
    inner = np.sort(rng.uniform(a, b, size=k))
    return np.concatenate([[a], inner, [b]])


def random_continuous_path(
    rng: np.random.Generator, d: int, a: float = 0.0, b: float = 1.0, k: int = 4
) -> PiecewisePath:
    ts = random_breakpoints(rng, a, b, k)
    ys = rng.normal(size=(ts.size, d))
    return PiecewisePath.from_samples(ts, ys)


def random_bv_path(
    rng: np.random.Generator, d: int, a: float = 0.0, b: float = 1.0, k: int = 4
) -> PiecewisePath:
    ts = random_breakpoints(rng, a, b, k)
    vals = rng.normal(size=(ts.size, d))
    left = vals + rng.normal(scale=0.5, size=vals.shape) * (rng.random(size=(ts.size, 1)) < 0.4)
    right = vals + rng.normal(scale=0.5, size=vals.shape) * (rng.random(size=(ts.size, 1)) < 0.4)
    left[0] = vals[0]
    right[-1] = vals[-1]
    return PiecewisePath.from_nodes(ts, left, vals, right)


def random_tuple_and_problem(rng: np.random.Generator, d: int = 2):
    """A well-formed (not necessarily valid) tuple plus a matching problem."""
    S = float(rng.uniform(1.0, 3.0))
    T = float(rng.uniform(1.0, 2.0))
    ss = random_breakpoints(rng, 0.0, S, int(rng.integers(2, 5)))
    t_vals = np.concatenate([[0.0], np.cumsum(rng.uniform(0.0, 1.0, size=ss.size - 1))])
    t_vals = t_vals * (T / t_vals[-1])
    t_hat = LipschitzPath.from_samples(ss, t_vals[:, None])
    z_hat = LipschitzPath.from_samples(ss, rng.normal(size=(ss.size, d)))
    ell_hat = random_bv_path(rng, d, 0.0, S, int(rng.integers(1, 4)))
    tup = ParametrizedTuple(S=S, t_hat=t_hat, z_hat=z_hat, ell_hat=ell_hat)

    A = random_spd(rng, d)
    energy = make_energy(A, {"kind": "linear", "b": rng.normal(size=d)})
    R = random_kernel(rng, d)
    load = random_bv_path(rng, d, 0.0, T, 2)
    z0 = z_hat.values[0]
    # force the start state into the stable set by matching the load there
    ell0 = energy.grad(z0)
    load = PiecewisePath.from_nodes(
        load.breakpoints,
        np.vstack([ell0, load.left[1:]]),
        np.vstack([ell0, load.values[1:]]),
        np.vstack([ell0, load.right[1:]]),
    )
    problem = RISProblem(
        energy=energy, R=R, load=load, z0=z0, ell0=ell0, T=T, stability_tol=1e-6
    )
    return tup, problem


def random_local_solution(rng: np.random.Generator, d: int):
    """Exact continuous local (indeed differential) solution and its problem.

    The state path is chosen first; on moving segments the load is set to
    grad E(z) + alpha * zdot/||zdot||, which places -D_z I exactly on the
    boundary of the elastic set in the direction of motion, and on plateaus
    the load equals grad E(z), putting the driving force at zero.
    """
    T = float(rng.uniform(1.0, 2.0))
    alpha = float(rng.uniform(0.5, 2.0))
    R = scaled_norm(alpha)
    A = random_spd(rng, d)
    b = rng.normal(size=d)
    energy = make_energy(A, {"kind": "linear", "b": b})

    k = int(rng.integers(2, 5))
    ts = random_breakpoints(rng, 0.0, T, k)
    zs = [rng.normal(size=d)]
    for _ in range(ts.size - 1):
        if rng.random() < 0.35:
            zs.append(zs[-1])  # plateau segment
        else:
            zs.append(zs[-1] + rng.normal(scale=0.5, size=d))
    zs = np.array(zs)
    z = PiecewisePath.from_samples(ts, zs)

    # segmentwise load: grad E(z) plus a constant subgradient of R at zdot
    left, vals, right = [], [], []
    etas = []
    for seg in range(z.n_segments):
        slope = z.segment_slope(seg)
        ns = np.linalg.norm(slope)
        etas.append(alpha * slope / ns if ns > 1e-12 else np.zeros(d))
    for i, t in enumerate(ts):
        g = energy.grad(zs[i])
        lv = g + etas[i - 1] if i > 0 else g + etas[0]
        rv = g + etas[i] if i < len(etas) else g + etas[-1]
        left.append(lv)
        vals.append(rv)
        right.append(rv)
    left[0] = vals[0]
    right[-1] = vals[-1]
    load = PiecewisePath.from_nodes(ts, left, vals, right)
    problem = RISProblem(
        energy=energy,
        R=R,
        load=load,
        z0=zs[0],
        ell0=load(0.0),
        T=T,
        stability_tol=1e-9,
    )
    return z, problem
