"""Certify or refute candidate solutions against the four solution concepts.

Every checker returns a :class:`CheckReport` carrying one residual per
condition.  Conditions that are affine in the data are evaluated exactly at
segment limits; the elastic-set distance term is generally nonlinear in the
curve parameter and is sampled with 16-node Gauss-Legendre quadrature per
segment plus the segment endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .model import ParametrizedTuple, RISProblem
from .paths import (
    LipschitzPath,
    PiecewisePath,
    compose_monotone,
    dissipation,
    kurzweil_stieltjes,
    merge_breakpoints,
    path_difference,
)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)

# slopes below this are treated as plateaus of the time reparametrization
SLOPE_TOL = 1e-12

DEFAULT_TOL = 1e-8


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    cid: str
    residual: float
    tolerance: float
    witness: object = None

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass(frozen=True)
class CheckReport:
    concept: str  # "differential" | "local" | "normalized_pbv" | "relaxed"
    conditions: tuple[ConditionResult, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, cid: str) -> ConditionResult:
        for c in self.conditions:
            if c.cid == cid:
                return c
        raise KeyError(cid)

    def failed_ids(self) -> list[str]:
        return [c.cid for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "overall": "pass" if self.overall else "fail",
            "conditions": [
                {
                    "id": c.cid,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "verdict": "pass" if c.passed else "fail",
                    "witness": _jsonable(c.witness),
                }
                for c in self.conditions
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def format_table(self) -> str:
        lines = [f"concept: {self.concept}"]
        for c in self.conditions:
            mark = "PASS" if c.passed else "FAIL"
            line = f"  [{mark}] {c.cid:<28} residual {c.residual:.3e} (tol {c.tolerance:.1e})"
            if not c.passed and c.witness is not None:
                line += f"  witness: {_jsonable(c.witness)}"
            lines.append(line)
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


@dataclass(frozen=True)
class IncreasingSet:
    """Maximal open intervals on which the time reparametrization increases."""

    intervals: tuple[tuple[float, float], ...]

    def contains(self, s: float) -> bool:
        return any(lo < s < hi for lo, hi in self.intervals)

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


def increasing_set(t_hat: LipschitzPath, slope_tol: float = SLOPE_TOL) -> IncreasingSet:
    if t_hat.dim != 1:
        raise PreconditionError("t_hat must be scalar")
    if not t_hat.is_nondecreasing():
        raise PreconditionError("t_hat must be nondecreasing")
    intervals: list[list[float]] = []
    for k in range(t_hat.n_segments):
        if t_hat.segment_slope(k)[0] > slope_tol:
            lo, hi = float(t_hat.breakpoints[k]), float(t_hat.breakpoints[k + 1])
            if intervals and abs(intervals[-1][1] - lo) <= 1e-14:
                intervals[-1][1] = hi
            else:
                intervals.append([lo, hi])
    return IncreasingSet(tuple((lo, hi) for lo, hi in intervals))


def plateau_intervals(t_hat: LipschitzPath, slope_tol: float = SLOPE_TOL) -> list[tuple[float, float]]:
    """Maximal intervals on which t_hat is constant."""
    out: list[list[float]] = []
    for k in range(t_hat.n_segments):
        if t_hat.segment_slope(k)[0] <= slope_tol:
            lo, hi = float(t_hat.breakpoints[k]), float(t_hat.breakpoints[k + 1])
            if out and abs(out[-1][1] - lo) <= 1e-14:
                out[-1][1] = hi
            else:
                out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


# ---------------------------------------------------------------------------
# quadrature backbone for the parametrized conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _SegmentArrays:
    """Per-segment data of the jointly refined tuple, as flat arrays."""

    lo: np.ndarray  # (K,)
    hi: np.ndarray  # (K,)
    t_slope: np.ndarray  # (K,)
    z_slope: np.ndarray  # (K, d)
    z_lo: np.ndarray  # (K, d) right limits of z_hat at lo
    ell_lo: np.ndarray  # (K, d) right limits of ell_hat at lo
    ell_slope: np.ndarray  # (K, d)

    @property
    def n(self) -> int:
        return self.lo.size


def _tuple_segments(tup: ParametrizedTuple) -> _SegmentArrays:
    ts = merge_breakpoints(
        tup.t_hat.breakpoints, tup.z_hat.breakpoints, tup.ell_hat.breakpoints
    )
    th = tup.t_hat.with_breakpoints(ts)
    zh = tup.z_hat.with_breakpoints(ts)
    lh = tup.ell_hat.with_breakpoints(ts)
    bp = th.breakpoints
    return _SegmentArrays(
        lo=bp[:-1].copy(),
        hi=bp[1:].copy(),
        t_slope=th.slopes()[:, 0],
        z_slope=zh.slopes(),
        z_lo=zh.right[:-1].copy(),
        ell_lo=lh.right[:-1].copy(),
        ell_slope=lh.slopes(),
    )


def _sample_matrix(lo: np.ndarray, hi: np.ndarray, with_ends: bool):
    """Per-segment evaluation points (K, m): Gauss nodes, optionally endpoints.

    Endpoint samples are nudged inward so that they probe the segment interior
    (one-sided limits), matching the almost-everywhere reading.
    """
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    weights = half[:, None] * _GL_W[None, :]
    if with_ends:
        eps = 1e-13 * np.maximum(1.0, np.abs(lo))
        nodes = np.column_stack([lo + eps, nodes, hi - eps])
    return nodes, weights


def _dist_matrix(problem: RISProblem, segs: _SegmentArrays, nodes: np.ndarray):
    """Elastic-set distances and gradients at the sample points.

    Returns (dist (K, m), grad (K, m, d), ell (K, m, d)).
    """
    K, m = nodes.shape
    d = segs.z_slope.shape[1]
    rel = nodes - segs.lo[:, None]
    Z = segs.z_lo[:, None, :] + segs.z_slope[:, None, :] * rel[:, :, None]
    L = segs.ell_lo[:, None, :] + segs.ell_slope[:, None, :] * rel[:, :, None]
    G = problem.energy.grad_many(Z.reshape(-1, d)).reshape(K, m, d)
    dist = problem.R.dist_to_elastic_many((L - G).reshape(-1, d)).reshape(K, m)
    return dist, G, L


def _gap_increments(problem: RISProblem, segs: _SegmentArrays, lo, hi) -> np.ndarray:
    """Per-segment integrals of the energy gap density over [lo, hi].

    The density R(z') + ||z'|| dist(ell - grad, elastic) + <grad - ell, z'> is
    pointwise nonnegative for any tuple, which is what makes the energy
    condition one-sided.
    """
    nodes, weights = _sample_matrix(lo, hi, with_ends=False)
    dist, G, L = _dist_matrix(problem, segs, nodes)
    r_part = problem.R.eval_many(segs.z_slope)
    nz = np.linalg.norm(segs.z_slope, axis=1)
    power = np.einsum("kmd,kd->km", G - L, segs.z_slope)
    density = r_part[:, None] + nz[:, None] * dist + power
    return np.sum(weights * density, axis=1)


def energy_residual(
    tup: ParametrizedTuple, problem: RISProblem, s1: float, s2: float
) -> float:
    """Signed energy-balance gap over [s1, s2] (theoretically >= 0).

    Computed as the integral of the pointwise-nonnegative gap density, which
    agrees with "stored energy plus contact cost minus supplied work" up to
    quadrature error on the chain-rule term.
    """
    if not (0 <= s1 <= s2 <= tup.S + 1e-9):
        raise DomainError("need 0 <= s1 <= s2 <= S")
    segs = _tuple_segments(tup)
    lo = np.maximum(segs.lo, s1)
    hi = np.minimum(segs.hi, s2)
    mask = hi > lo
    if not np.any(mask):
        return 0.0
    sub = _SegmentArrays(
        lo=segs.lo[mask],
        hi=segs.hi[mask],
        t_slope=segs.t_slope[mask],
        z_slope=segs.z_slope[mask],
        z_lo=segs.z_lo[mask],
        ell_lo=segs.ell_lo[mask],
        ell_slope=segs.ell_slope[mask],
    )
    return float(np.sum(_gap_increments(problem, sub, lo[mask], hi[mask])))


# ---------------------------------------------------------------------------
# shared condition evaluators
# ---------------------------------------------------------------------------


def _endpoint_condition(tup: ParametrizedTuple, problem: RISProblem) -> tuple[float, object]:
    r0 = abs(float(tup.t_hat(0.0)[0]))
    rT = abs(float(tup.t_hat(tup.S)[0]) - problem.T)
    rz = float(np.linalg.norm(tup.z_hat(0.0) - problem.z0))
    res = max(r0, rT, rz)
    wit = {"t_hat(0)": r0, "t_hat(S)-T": rT, "z_hat(0)-z0": rz}
    return res, wit


def _complementarity_condition(tup, problem, segs: _SegmentArrays) -> tuple[float, object]:
    nodes, _ = _sample_matrix(segs.lo, segs.hi, with_ends=True)
    dist, _, _ = _dist_matrix(problem, segs, nodes)
    vals = segs.t_slope[:, None] * dist
    k, j = np.unravel_index(np.argmax(vals), vals.shape)
    worst = float(vals[k, j])
    return worst, ({"s": float(nodes[k, j])} if worst > 0 else None)


def _normalization_condition(tup, problem, segs: _SegmentArrays) -> tuple[float, object]:
    nodes, _ = _sample_matrix(segs.lo, segs.hi, with_ends=True)
    dist, _, _ = _dist_matrix(problem, segs, nodes)
    r_part = problem.R.eval_many(segs.z_slope)
    nz = np.linalg.norm(segs.z_slope, axis=1)
    vals = np.abs(
        segs.t_slope[:, None] + r_part[:, None] + nz[:, None] * dist - 1.0
    )
    k, j = np.unravel_index(np.argmax(vals), vals.shape)
    worst = float(vals[k, j])
    return worst, ({"s": float(nodes[k, j])} if worst > 0 else None)


def _energy_condition(tup, problem, segs: _SegmentArrays) -> tuple[float, object]:
    # the gap density is pointwise nonnegative, so the worst pair of curve
    # parameters is read off the cumulative gap at segment boundaries
    increments = _gap_increments(problem, segs, segs.lo, segs.hi)
    cum = np.concatenate([[0.0], np.cumsum(increments)])
    bounds = np.concatenate([[segs.lo[0]], segs.hi])
    best, run_min, run_arg = 0.0, 0.0, 0
    wit = None
    for j in range(1, cum.size):
        if cum[j] - run_min > best:
            best = cum[j] - run_min
            wit = {"s1": float(bounds[run_arg]), "s2": float(bounds[j])}
        if cum[j] < run_min:
            run_min, run_arg = cum[j], j
    return best, wit


def _sup_dev_open(path: PiecewisePath, lo: float, hi: float, target: np.ndarray) -> float:
    """Sup of ||path - target|| over the open interval (lo, hi), via limits."""
    if hi - lo <= 1e-14:
        return 0.0
    sup = max(
        float(np.linalg.norm(path.right_limit(lo) - target)),
        float(np.linalg.norm(path.left_limit(hi) - target)),
    )
    for k, t in enumerate(path.breakpoints):
        if lo + 1e-14 < t < hi - 1e-14:
            for v in (path.left[k], path.values[k], path.right[k]):
                sup = max(sup, float(np.linalg.norm(v - target)))
    return sup


def _one_sided_loads(load: PiecewisePath, t_star: float, T: float):
    """Left/right load limits with the 0- := 0 and T+ := T conventions."""
    lminus = load(0.0) if t_star <= 1e-14 else load.left_limit(t_star)
    lplus = load(T) if t_star >= T - 1e-14 else load.right_limit(t_star)
    return lminus, lplus


def _set_dist(v: np.ndarray, candidates: Iterable[np.ndarray]) -> float:
    return min(float(np.linalg.norm(v - c)) for c in candidates)


def _load_compatibility_condition(tup, problem) -> tuple[float, object]:
    load = problem.load
    t_hat, ell_hat = tup.t_hat, tup.ell_hat
    worst, wit = 0.0, None

    plateaus = plateau_intervals(t_hat)

    def in_plateau(s: float) -> bool:
        return any(lo - 1e-14 <= s <= hi + 1e-14 for lo, hi in plateaus)

    # outside plateaus the preimage of any time is a single point: the
    # parametrized load must equal the composed load there (limit values on
    # segment interiors, a three-point value set at load jumps)
    comp = compose_monotone(load, t_hat)
    diff = path_difference(ell_hat, comp)
    for k in range(diff.n_segments):
        lo, hi = float(diff.breakpoints[k]), float(diff.breakpoints[k + 1])
        mid = 0.5 * (lo + hi)
        if in_plateau(mid):
            continue
        r = max(
            float(np.linalg.norm(diff.right[k])),
            float(np.linalg.norm(diff.left[k + 1])),
        )
        if r > worst:
            worst, wit = r, {"interval": (lo, hi)}
    for k, s in enumerate(diff.breakpoints):
        s = float(s)
        if in_plateau(s):
            continue
        t_star = float(np.clip(t_hat(s)[0], 0.0, problem.T))
        lminus, lplus = _one_sided_loads(load, t_star, problem.T)
        r = _set_dist(ell_hat(s), [load(t_star), lminus, lplus])
        if r > worst:
            worst, wit = r, {"s": s}

    # on each plateau there must be a switch point: left-limit load before,
    # right-limit load after, and one of the three admissible values at it
    for lo, hi in plateaus:
        t_star = float(np.clip(t_hat(0.5 * (lo + hi))[0], 0.0, problem.T))
        lminus, lplus = _one_sided_loads(load, t_star, problem.T)
        allowed = [load(t_star), lminus, lplus]
        cands = sorted(
            {lo, hi}
            | {float(s) for s in ell_hat.breakpoints if lo - 1e-14 <= s <= hi + 1e-14}
            | set(np.linspace(lo, hi, 129))
        )
        best_v = np.inf
        for s_star in cands:
            v = max(
                _sup_dev_open(ell_hat, lo, s_star, lminus),
                _sup_dev_open(ell_hat, s_star, hi, lplus),
                _set_dist(ell_hat(s_star), allowed),
            )
            # point values strictly before/after the switch
            for k, s in enumerate(ell_hat.breakpoints):
                s = float(s)
                if lo - 1e-14 <= s < s_star - 1e-14:
                    v = max(v, float(np.linalg.norm(ell_hat.values[k] - lminus)))
                elif s_star + 1e-14 < s <= hi + 1e-14:
                    v = max(v, float(np.linalg.norm(ell_hat.values[k] - lplus)))
            if v < best_v - 1e-15:
                best_v = v
        if best_v > worst:
            worst, wit = best_v, {"interval": (lo, hi), "time": t_star}
    return worst, wit


def _load_match_condition(tup, problem) -> tuple[float, object]:
    """Parametrized load equals composed load a.e. where time advances."""
    comp = compose_monotone(problem.load, tup.t_hat)
    diff = path_difference(tup.ell_hat, comp)
    M = increasing_set(tup.t_hat)
    worst, wit = 0.0, None
    for k in range(diff.n_segments):
        lo, hi = float(diff.breakpoints[k]), float(diff.breakpoints[k + 1])
        mid = 0.5 * (lo + hi)
        if not M.contains(mid):
            continue
        r = max(
            float(np.linalg.norm(diff.right[k])),
            float(np.linalg.norm(diff.left[k + 1])),
        )
        if r > worst:
            worst, wit = r, {"interval": (lo, hi)}
    return worst, wit


# ---------------------------------------------------------------------------
# public checkers
# ---------------------------------------------------------------------------


def check_normalized_pbv(
    tup: ParametrizedTuple, problem: RISProblem, tol: float = DEFAULT_TOL
) -> CheckReport:
    """Full check against the parametrized solution concept with load compatibility."""
    segs = _tuple_segments(tup)
    conds = []
    r, w = _endpoint_condition(tup, problem)
    conds.append(ConditionResult("endpoints", r, tol, w))
    r, w = _complementarity_condition(tup, problem, segs)
    conds.append(ConditionResult("complementarity", r, tol, w))
    r, w = _normalization_condition(tup, problem, segs)
    conds.append(ConditionResult("normalization", r, tol, w))
    r, w = _energy_condition(tup, problem, segs)
    conds.append(ConditionResult("energy_identity", r, tol, w))
    r, w = _load_compatibility_condition(tup, problem)
    conds.append(ConditionResult("load_compatibility", r, tol, w))
    return CheckReport("normalized_pbv", tuple(conds))


def check_relaxed(
    tup: ParametrizedTuple, problem: RISProblem, tol: float = DEFAULT_TOL
) -> CheckReport:
    """Check against the relaxed concept: load agreement only where time advances."""
    segs = _tuple_segments(tup)
    conds = []
    r, w = _endpoint_condition(tup, problem)
    conds.append(ConditionResult("endpoints", r, tol, w))
    r, w = _complementarity_condition(tup, problem, segs)
    conds.append(ConditionResult("complementarity", r, tol, w))
    r, w = _normalization_condition(tup, problem, segs)
    conds.append(ConditionResult("normalization", r, tol, w))
    r, w = _energy_condition(tup, problem, segs)
    conds.append(ConditionResult("energy_identity", r, tol, w))
    r, w = _load_match_condition(tup, problem)
    conds.append(ConditionResult("load_match_on_increasing_set", r, tol, w))
    return CheckReport("relaxed", tuple(conds))


def _physical_grid(problem: RISProblem, z: PiecewisePath, grid) -> np.ndarray:
    base = grid if grid is not None else np.linspace(0.0, problem.T, 17)
    return merge_breakpoints(base, z.breakpoints, problem.load.breakpoints)


def check_local(
    z: PiecewisePath,
    problem: RISProblem,
    tol: float = DEFAULT_TOL,
    grid: Sequence[float] | None = None,
) -> CheckReport:
    """Check the local solution concept: pointwise stability + energy inequality."""
    if abs(z.a) > 1e-12 or abs(z.b - problem.T) > 1e-9:
        raise PreconditionError("candidate must be defined on [0, T]")
    pts = _physical_grid(problem, z, grid)

    # stability holds off the finitely many discontinuity points; sample
    # segment interiors of the joint refinement
    ts = merge_breakpoints(z.breakpoints, problem.load.breakpoints)
    zr = z.with_breakpoints(ts)
    lr = problem.load.with_breakpoints(ts)
    worst_s, wit_s = 0.0, None
    for k in range(zr.n_segments):
        lo, hi = float(zr.breakpoints[k]), float(zr.breakpoints[k + 1])
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        samples = [lo + 1e-13 * max(1.0, abs(lo)), *(mid + half * _GL_X), hi - 1e-13 * max(1.0, abs(hi))]
        zl, zh_ = zr.right[k], zr.left[k + 1]
        ll, lh_ = lr.right[k], lr.left[k + 1]
        for t in samples:
            lam = (t - lo) / (hi - lo)
            zt = (1 - lam) * zl + lam * zh_
            lt = (1 - lam) * ll + lam * lh_
            rres = problem.R.dist_to_elastic(lt - problem.energy.grad(zt))
            if rres > worst_s:
                worst_s, wit_s = rres, {"t": float(t)}

    worst_e, wit_e = 0.0, None
    for i, t1 in enumerate(pts):
        for t2 in pts[i:]:
            gap = (
                problem.value_I(t2, z(t2))
                + dissipation(problem.R, z, t1, t2)
                - problem.value_I(t1, z(t1))
                + kurzweil_stieltjes(z, problem.load, t1, t2)
            )
            if gap > worst_e:
                worst_e, wit_e = gap, {"t1": float(t1), "t2": float(t2)}
    conds = (
        ConditionResult("local_stability", worst_s, tol, wit_s),
        ConditionResult("energy_inequality", max(worst_e, 0.0), tol, wit_e),
    )
    return CheckReport("local", conds)


def check_differential(
    z: PiecewisePath,
    problem: RISProblem,
    tol: float = DEFAULT_TOL,
) -> CheckReport:
    """Check the a.e. differential inclusion for a continuous piecewise-affine state."""
    if not z.is_continuous():
        raise PreconditionError("differential candidates must be continuous")
    if abs(z.a) > 1e-12 or abs(z.b - problem.T) > 1e-9:
        raise PreconditionError("candidate must be defined on [0, T]")
    ts = merge_breakpoints(z.breakpoints, problem.load.breakpoints)
    zr = z.with_breakpoints(ts)
    lr = problem.load.with_breakpoints(ts)
    worst, wit = 0.0, None
    for k in range(zr.n_segments):
        lo, hi = float(zr.breakpoints[k]), float(zr.breakpoints[k + 1])
        q = zr.segment_slope(k)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for t in [lo + 1e-13, *(mid + half * _GL_X), hi - 1e-13]:
            lam = (t - lo) / (hi - lo)
            zt = (1 - lam) * zr.right[k] + lam * zr.left[k + 1]
            lt = (1 - lam) * lr.right[k] + lam * lr.left[k + 1]
            res = problem.R.dist_to_subdiff(q, lt - problem.energy.grad(zt))
            if res > worst:
                worst, wit = res, {"t": float(t)}
    return CheckReport("differential", (ConditionResult("inclusion", worst, tol, wit),))
