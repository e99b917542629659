"""Analytic probe arcs and limits of normalized differentials along them.

Arcs are polynomial curves t -> a + sum_k c_k t^{e_k} per coordinate (monomial
offsets by default).  Limits of the normalized gradient (row space of the
Jacobian for maps with several components) are extracted by sampling on a
geometric t-schedule, dividing out the leading t-order, and accelerating the
sequence with Richardson stages that eliminate the successive integer powers
of t; convergence is declared when three consecutive accelerated iterates
agree to ``limit_tol`` in projective distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .poly import PolynomialMap, jacobian
from .subspaces import (
    SubspaceBasis,
    canonical_phase,
    orthonormal_rows,
    projective_distance,
    snap_projector,
)

CRITICAL_TOL = 1e-14


@dataclass(frozen=True)
class Arc:
    """Curve x_i(t) = base_i + sum_k coeff_{ik} t^{exp_ik}; exponents >= 1."""

    base: np.ndarray
    offsets: Tuple[Tuple[Tuple[complex, int], ...], ...]
    real: bool = False

    def __post_init__(self):
        base = np.asarray(self.base, dtype=complex)
        object.__setattr__(self, "base", base)
        if len(self.offsets) != base.shape[0]:
            raise ValueError("need one offset polynomial per coordinate")
        for coord in self.offsets:
            for _, e in coord:
                if e < 1:
                    raise ValueError("offset exponents must be >= 1")

    @property
    def ambient(self) -> int:
        return self.base.shape[0]

    def points(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        pts = np.repeat(self.base[None, :], len(ts), axis=0)
        for i, coord in enumerate(self.offsets):
            for c, e in coord:
                pts[:, i] += c * ts ** e
        return pts

    @staticmethod
    def monomial(base, coeffs, exps, real: bool = False) -> "Arc":
        offsets = tuple(
            ((complex(c), int(e)),) if c != 0 else ()
            for c, e in zip(coeffs, exps)
        )
        return Arc(np.asarray(base, dtype=complex), offsets, real)


@dataclass(frozen=True)
class LimitSchedule:
    t0: float = 0.25
    ratio: float = 0.5
    max_steps: int = 14
    limit_tol: float = 1e-9
    t_min: float = 1e-6

    def __post_init__(self):
        if not (0 < self.ratio < 1):
            raise ValueError("ratio must lie in (0, 1)")
        if self.t0 * self.ratio ** self.max_steps < self.t_min * self.ratio:
            raise ValueError("schedule runs below its t_min floor")

    def samples(self) -> np.ndarray:
        ts = self.t0 * self.ratio ** np.arange(self.max_steps)
        return ts[ts >= self.t_min]


@dataclass(frozen=True)
class Divergent:
    reason: str


@dataclass(frozen=True)
class CriticalArc:
    reason: str


LimitOutcome = Union[SubspaceBasis, Divergent, CriticalArc]


def _richardson(seq: np.ndarray, ratio: float, stages: int) -> np.ndarray:
    """Eliminate t^1..t^stages from a sequence sampled at t_k = t0 * ratio^k."""
    out = seq
    for p in range(1, stages + 1):
        if out.shape[0] < 2:
            break
        rp = ratio ** p
        out = (out[1:] - rp * out[:-1]) / (1.0 - rp)
    return out


class GradientEvaluator:
    """Vectorized Jacobian rows along arcs for one polynomial map."""

    def __init__(self, F: PolynomialMap):
        self.F = F
        jac = jacobian(F)
        self.rows = [[entry.numeric_data() for entry in row] for row in jac.rows]
        self.component_data = [f.numeric_data() for f in F.components]
        self.n = F.n
        self.l = F.l

    def jacobian_at(self, pts: np.ndarray) -> np.ndarray:
        """(m, l, n) Jacobian values at m points."""
        m = pts.shape[0]
        out = np.zeros((m, self.l, self.n), dtype=complex)
        for j, row in enumerate(self.rows):
            for i, (exps, coeffs) in enumerate(row):
                if len(coeffs) == 0:
                    continue
                monomials = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
                out[:, j, i] = monomials @ coeffs
        return out

    def components_at(self, pts: np.ndarray) -> np.ndarray:
        m = pts.shape[0]
        out = np.zeros((m, self.l), dtype=complex)
        for j, (exps, coeffs) in enumerate(self.component_data):
            if len(coeffs) == 0:
                continue
            monomials = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
            out[:, j] = monomials @ coeffs
        return out


def limit_normalized_differential(
    evaluator: GradientEvaluator,
    arc: Arc,
    sched: LimitSchedule,
    critical_tol: float = CRITICAL_TOL,
) -> LimitOutcome:
    """Limit of the normalized differential (or the l-dim row space) along an arc."""
    ts = sched.samples()
    if len(ts) < 4:
        return Divergent("schedule too short")
    pts = arc.points(ts)
    jac = evaluator.jacobian_at(pts)

    if evaluator.l == 1:
        return _limit_single(jac[:, 0, :], ts, sched, critical_tol)
    return _limit_rowspace(jac, ts, sched, critical_tol)


def _limit_single(grads: np.ndarray, ts, sched: LimitSchedule, critical_tol: float) -> LimitOutcome:
    norms = np.linalg.norm(grads, axis=1)
    # a critical arc has a numerically zero differential already at the largest
    # t sample; along legitimate arcs the differential merely decays with t
    if np.max(np.abs(grads[0])) < critical_tol:
        return CriticalArc("differential vanishes along the arc")
    keep = norms > 1e-250
    grads, ts, norms = grads[keep], ts[keep], norms[keep]
    if len(ts) < 5:
        return Divergent("differential underflows along the schedule")

    # leading t-order from the norm decay on the small-t half of the schedule
    logs = np.log(norms)
    slopes = np.diff(logs) / math.log(sched.ratio)
    tail = slopes[len(slopes) // 2 :]
    order = float(np.median(tail))
    k = round(order)
    if abs(order - k) > 0.2:
        return Divergent(f"leading order unstable ({order:.3f})")

    scaled = grads / (ts[:, None] ** k)
    scale = np.max(np.abs(scaled))
    if not np.isfinite(scale) or scale == 0:
        return Divergent("scaling failed")
    scaled = scaled / scale

    # imperfect cancellation below the leading order grows like 1/t after
    # scaling; trim trailing samples whose successive differences blow up
    for _ in range(4):
        if scaled.shape[0] < 7:
            break
        diffs = np.linalg.norm(np.diff(scaled, axis=0), axis=1)
        if diffs[-1] > max(diffs[-3], 1e-13):
            scaled = scaled[:-1]
            ts = ts[:-1]
        else:
            break

    stages = min(4, len(ts) - 3)
    accel = _richardson(scaled, sched.ratio, stages)
    if accel.shape[0] < 3:
        return Divergent("not enough samples after acceleration")
    dists = [
        projective_distance(accel[i], accel[i + 1]) for i in range(len(accel) - 1)
    ]
    ok = sum(1 for d in dists[-3:] if d < sched.limit_tol)
    if ok < 3:
        return Divergent(f"projective distances not below tol: {dists[-3:]}")
    limit = accel[-1]
    nrm = np.linalg.norm(limit)
    if nrm < 1e-13:
        return Divergent("accelerated limit vanished")
    row = canonical_phase(limit / nrm)
    return SubspaceBasis(row[None, :], grads.shape[1])


def _limit_rowspace(jac: np.ndarray, ts, sched: LimitSchedule, critical_tol: float) -> LimitOutcome:
    m, l, n = jac.shape
    if np.max(np.abs(jac[0])) < critical_tol:
        return CriticalArc("differential vanishes along the arc")
    projectors = np.zeros((m, n, n), dtype=complex)
    for k in range(m):
        rows = jac[k]
        basis = orthonormal_rows(rows, rank_tol=1e-12)
        if basis.shape[0] < l:
            return CriticalArc("Jacobian rank drops along the arc")
        projectors[k] = basis.conj().T @ basis
    stages = min(4, m - 3)
    accel = _richardson(projectors, sched.ratio, stages)
    if accel.shape[0] < 3:
        return Divergent("not enough samples after acceleration")
    dists = [
        float(np.linalg.norm(accel[i] - accel[i + 1])) for i in range(len(accel) - 1)
    ]
    if sum(1 for d in dists[-3:] if d < sched.limit_tol * n) < 3:
        return Divergent(f"projector distances not below tol: {dists[-3:]}")
    snapped = snap_projector(accel[-1])
    if snapped is None:
        return Divergent("projector eigenvalues not near {0,1}")
    rows, rank = snapped
    if rank != l:
        return Divergent(f"limiting rank {rank} != {l}")
    return SubspaceBasis(rows, n)


def projector_limit(
    subspaces: Sequence[SubspaceBasis],
    ratio: float = 0.5,
    limit_tol: float = 1e-7,
    snap_gap: float = 0.5,
) -> LimitOutcome:
    """Limit of a sequence of subspaces sampled along a geometric t-schedule.

    Works on the longest constant-dimension suffix (samples whose scale
    straddles a nearby degeneration can carry a transient dimension), fits the
    projector entries with a low-degree polynomial in the geometric abscissa
    and snaps the extrapolated projector's eigenvalues to {0, 1}.
    """
    if len(subspaces) < 4:
        return Divergent("need at least 4 subspace samples")
    dims = [s.dim for s in subspaces]
    # keep the modal-dimension samples: both heads (scale above a nearby
    # degeneration) and tails (directions entering below the rank threshold)
    # can misread the dimension on a minority of samples
    counts: dict = {}
    for d in dims:
        counts[d] = counts.get(d, 0) + 1
    modal = max(sorted(counts), key=lambda d: counts[d])
    kept_idx = [i for i, d in enumerate(dims) if d == modal]
    if len(kept_idx) < max(4, (len(dims) + 1) // 2):
        return DimensionJump(f"dimension unstable along the curve: {dims}")
    kept_idx = kept_idx[-6:]  # smallest-t samples: keeps the fit window short
    kept = [subspaces[i] for i in kept_idx]
    ambient = kept[0].ambient
    projectors = np.stack([s.projector() for s in kept])
    m = len(kept)
    xs = np.array([ratio ** i for i in kept_idx])
    xs = xs / xs[0]
    degree = min(3, m - 2)
    V = np.vander(xs, degree + 1, increasing=True)
    flat = projectors.reshape(m, -1)
    coeffs, residues, *_ = np.linalg.lstsq(V, flat, rcond=None)
    fit_residual = float(np.sqrt(residues.sum())) if residues.size else 0.0
    if fit_residual > max(limit_tol * ambient, 1e-5):
        return Divergent(f"projectors oscillate: fit residual {fit_residual:.2e}")
    P0 = coeffs[0].reshape(ambient, ambient)
    snapped = snap_projector(P0, gap=snap_gap)
    if snapped is None:
        return Divergent("projector eigenvalues not near {0,1}")
    rows, rank = snapped
    if rank != modal:
        return Divergent(f"extrapolated rank {rank} != modal dimension {modal}")
    return SubspaceBasis(rows, ambient)


@dataclass(frozen=True)
class DimensionJump:
    reason: str


# ---------------------------------------------------------------------------
# random arc sampling


def random_monomial_arc(
    rng: np.random.Generator,
    base: np.ndarray,
    max_exponent: int,
    real: bool,
) -> Arc:
    """Random monomial arc: unit-style coefficients, exponents in 1..E.

    Half the draws use +-1 (fourth roots of unity over C) coefficients, which
    line up with the rational kernel directions of structured fixtures; the
    rest use continuous phases with mild magnitude spread.  A random subset of
    coordinates may stay frozen to diversify approach directions.
    """
    n = len(base)
    if rng.random() < 0.35:
        # equal exponents: ties between layers surface mixed limit covectors
        exps = np.full(n, int(rng.integers(1, min(3, max_exponent) + 1)))
    else:
        exps = rng.integers(1, max_exponent + 1, size=n)
    if rng.random() < 0.5:
        if real:
            coeffs = rng.choice([-1.0, 1.0], size=n).astype(complex)
        else:
            coeffs = rng.choice([1.0, -1.0, 1j, -1j], size=n)
    else:
        mags = np.exp(rng.uniform(-0.7, 0.7, size=n))
        if real:
            coeffs = rng.choice([-1.0, 1.0], size=n) * mags
        else:
            coeffs = np.exp(2j * np.pi * rng.random(n)) * mags
    if rng.random() < 0.3 and n > 1:
        mask = rng.random(n) < 0.5
        if not np.any(~mask):
            mask[rng.integers(0, n)] = False
        coeffs = np.where(mask, 0.0, coeffs)
    return Arc.monomial(base, coeffs, exps, real=real)
