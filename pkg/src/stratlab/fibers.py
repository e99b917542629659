"""Floating-point estimation of close-then-span bundle fibers.

Depth-1 fibers are spans of limits of the normalized differential along
random monomial arcs plus cancellation-descent arcs (see
:mod:`stratlab.descent`).  Depth p+1 adds limits of depth-p fibers along
curves inside supplied singular-locus samplers that converge to the probe
point, mirroring the close-then-span recursion.  Estimates are memoized per
(rounded point, depth); rerunning with the same seed reproduces reports
exactly.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arcs import (
    Arc,
    CriticalArc,
    Divergent,
    DimensionJump,
    GradientEvaluator,
    LimitSchedule,
    limit_normalized_differential,
    projector_limit,
    random_monomial_arc,
)
from .config import RunConfig
from .descent import DerivativePool, GradientLayers, candidate_weights, descent_directions
from .poly import PolynomialMap
from .scalars import scalar_is_exact, scalar_to_complex
from .subspaces import SpanDecision, SubspaceBasis, span_of_covectors, subspaces_equal


class NotSingularError(ValueError):
    """A probe point failed the numeric Sing(F) membership check."""


class UnreachableDepthError(ValueError):
    """Depth >= 2 was requested without a usable locus sampler."""


@dataclass(frozen=True)
class FiberEstimate:
    point: Tuple[complex, ...]
    depth: int
    basis: SubspaceBasis
    dimension: int
    gap: float
    arc_count: int
    confidence: str
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ApproachCurve:
    """A curve t -> Sing(F) converging to a probe point as t -> 0+.

    Curves built from a stratum parametrization also carry the parameter-space
    curve, so recursion at the curve's points can specialize the originating
    sampler with an exact preimage instead of searching for one.
    """

    label: str
    points_fn: Callable[[np.ndarray], np.ndarray]
    sampler: object = None
    params_fn: Optional[Callable[[float], np.ndarray]] = None

    def points(self, ts: np.ndarray) -> np.ndarray:
        return self.points_fn(np.asarray(ts, dtype=float))


def to_complex_point(point) -> np.ndarray:
    return np.array(
        [scalar_to_complex(v) if scalar_is_exact(v) else complex(v) for v in point]
    )


class GlaeserEngine:
    """Numeric fiber estimation for a fixed polynomial map and configuration."""

    def __init__(self, F: PolynomialMap, config: RunConfig):
        self.F = F
        self.cfg = config
        self.evaluator = GradientEvaluator(F)
        self._memo: Dict[Tuple, FiberEstimate] = {}
        self._memo_lock = threading.Lock()
        self._pool = DerivativePool(F.components[0]) if F.l == 1 else None

    # -- plumbing ------------------------------------------------------------

    def _round_key(self, point: np.ndarray) -> Tuple:
        digits = self.cfg.tolerances.memo_round
        return tuple(
            (round(float(v.real), digits), round(float(v.imag), digits)) for v in point
        )

    def _rng(self, tag: str, key) -> np.random.Generator:
        digest = hashlib.sha256(
            repr((self.cfg.seed, tag, key)).encode()
        ).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    def sing_residual(self, point: np.ndarray) -> float:
        pts = point[None, :]
        values = self.evaluator.components_at(pts)[0]
        jac = self.evaluator.jacobian_at(pts)[0]
        worst = float(np.max(np.abs(values))) if values.size else 0.0
        size = min(self.F.l, self.F.n)
        import itertools

        minor_vals = []
        for rows in itertools.combinations(range(self.F.l), size):
            for cols in itertools.combinations(range(self.F.n), size):
                minor_vals.append(abs(np.linalg.det(jac[np.ix_(rows, cols)])))
        if minor_vals:
            worst = max(worst, max(minor_vals))
        return worst

    def point_in_sing(self, point: np.ndarray) -> bool:
        return self.sing_residual(point) < self.cfg.tolerances.sing_tol

    # -- depth 1 ---------------------------------------------------------------

    def fiber1(self, point, primary: bool = True, check_sing: bool = True) -> FiberEstimate:
        exact_point = list(point)
        cpoint = to_complex_point(point)
        key = (self._round_key(cpoint), 1)
        with self._memo_lock:
            if key in self._memo:
                return self._memo[key]

        if check_sing and not self.point_in_sing(cpoint):
            raise NotSingularError(
                f"point {cpoint} has Sing residual {self.sing_residual(cpoint):.2e}"
            )

        tol = self.cfg.tolerances
        budgets = self.cfg.budgets
        rng = self._rng("fiber1", key)
        sched = tol.schedule()
        n_arcs = budgets.arc_count if primary else budgets.aux_arc_count

        rows: List[np.ndarray] = []
        warnings: List[str] = []
        used = 0
        for _ in range(n_arcs):
            arc = random_monomial_arc(rng, cpoint, budgets.max_exponent, self.cfg.real)
            outcome = limit_normalized_differential(self.evaluator, arc, sched)
            used += 1
            if isinstance(outcome, SubspaceBasis):
                rows.extend(outcome.rows)

        if self.F.l == 1 and budgets.descent.enabled:
            used += self._descent_arcs(exact_point, cpoint, rng, sched, rows, primary)

        decision = span_of_covectors(
            np.array(rows) if rows else np.zeros((0, self.F.n)), self.F.n, tol.rank_tol
        )
        confidence = "high"
        if decision.dimension == 0:
            confidence = "low"
            warnings.append("no converged arc limits")
        elif decision.gap < 10.0:
            confidence = "low"
            warnings.append(f"rank decision gap {decision.gap:.2f} below 10x margin")
        estimate = FiberEstimate(
            point=tuple(cpoint),
            depth=1,
            basis=decision.basis,
            dimension=decision.dimension,
            gap=decision.gap,
            arc_count=used,
            confidence=confidence,
            warnings=tuple(warnings),
        )
        with self._memo_lock:
            self._memo[key] = estimate
        return estimate

    def _descent_arcs(self, exact_point, cpoint, rng, sched, rows, primary: bool) -> int:
        dcfg = self.cfg.budgets.descent
        if not primary:
            dcfg = dcfg.reduced()
        point_for_layers = (
            exact_point if all(scalar_is_exact(v) for v in exact_point) else list(cpoint)
        )
        try:
            layers = GradientLayers(self.F, point_for_layers, pool=self._pool)
        except ValueError:
            return 0
        # cancellation residuals grow like 1/t after scaling; keep descent
        # arcs away from the deepest t samples
        tol = self.cfg.tolerances
        steps = 1
        while tol.t0 * tol.ratio ** steps >= 1e-4:
            steps += 1
        descent_sched = LimitSchedule(
            t0=tol.t0, ratio=tol.ratio, max_steps=min(steps, sched.max_steps),
            limit_tol=sched.limit_tol, t_min=min(1e-4, tol.t0 * tol.ratio),
        )
        used = 0
        for weights in candidate_weights(self.F, rng, dcfg):
            dirs = descent_directions(layers, weights, self.cfg.real, rng, dcfg)
            for gamma in dirs:
                arc = Arc.monomial(cpoint, gamma, weights, real=self.cfg.real)
                outcome = limit_normalized_differential(self.evaluator, arc, descent_sched)
                used += 1
                if isinstance(outcome, SubspaceBasis):
                    rows.extend(outcome.rows)
        return used

    # -- depth >= 2 -----------------------------------------------------------

    def fiber(self, point, depth: int, samplers: Sequence = (),
              primary: bool = True) -> FiberEstimate:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if depth == 1:
            return self.fiber1(point, primary=primary)
        cpoint = to_complex_point(point)
        key = (self._round_key(cpoint), depth)
        with self._memo_lock:
            if key in self._memo:
                return self._memo[key]

        tol = self.cfg.tolerances
        budgets = self.cfg.budgets
        prev = self.fiber(point, depth - 1, samplers, primary=primary)
        base_rows: List[np.ndarray] = list(prev.basis.rows)
        warnings: List[str] = list(prev.warnings)
        arc_count = prev.arc_count

        usable = [s for s in samplers if s.approaches(cpoint)]
        if not usable:
            raise UnreachableDepthError(
                f"depth {depth} at {cpoint}: no supplied locus sampler reaches the point"
            )

        rng = self._rng("approach", key)
        n_samples = budgets.approach_samples if primary else max(6, budgets.approach_samples - 3)
        n_dirs = budgets.approach_directions if primary else max(2, budgets.approach_directions - 1)
        ts = tol.approach_t0 * tol.approach_ratio ** np.arange(n_samples)
        for sampler in usable:
            curves = sampler.approach_curves(cpoint, rng, n_dirs)
            for curve in curves:
                pts = curve.points(ts)
                residuals = [self.sing_residual(p) for p in pts]
                if max(residuals) > tol.sing_tol:
                    warnings.append(
                        f"approach curve {curve.label} leaves Sing(F) "
                        f"(residual {max(residuals):.1e}); skipped"
                    )
                    continue
                try:
                    fibers = []
                    for t_k, p in zip(ts, pts):
                        # recurse with the originating sampler specialized by the
                        # known parameter preimage of this curve point
                        if curve.params_fn is not None and curve.sampler is not None:
                            sub = [curve.sampler.specialize(curve.params_fn(t_k))]
                        else:
                            sub = [sampler]
                        fibers.append(self.fiber(p, depth - 1, sub, primary=False))
                except (NotSingularError, UnreachableDepthError) as exc:
                    warnings.append(f"approach curve {curve.label}: {exc}")
                    continue
                arc_count += sum(f.arc_count for f in fibers)
                outcome = projector_limit(
                    [f.basis for f in fibers],
                    ratio=tol.approach_ratio,
                    limit_tol=max(tol.limit_tol, 1e-8),
                )
                if isinstance(outcome, SubspaceBasis):
                    base_rows.extend(outcome.rows)
                elif isinstance(outcome, (Divergent, DimensionJump)):
                    warnings.append(f"approach curve {curve.label}: {outcome.reason}")

        fresh = self.fiber1(point, primary=primary)
        base_rows.extend(fresh.basis.rows)

        # fixed-point guard: when every collected covector stays within the
        # previous depth's span up to the noise threshold, this depth is a
        # fixed point of the close-then-span recursion; reuse the basis so
        # approximation error cannot masquerade as growth across depths
        snapped = False
        if prev.basis.dim:
            P = prev.basis.projector()
            max_resid = 0.0
            for row in base_rows:
                nrm = np.linalg.norm(row)
                if nrm == 0:
                    continue
                resid = np.linalg.norm(row - row @ P.T) / nrm
                max_resid = max(max_resid, float(resid))
            if max_resid < tol.stab_tol:
                snapped = True

        if snapped:
            decision_basis = prev.basis
            dimension = prev.dimension
            gap = prev.gap
            confidence = prev.confidence
            warnings.append("fixed point: no new direction above the noise threshold")
        else:
            decision = span_of_covectors(np.array(base_rows), self.F.n, tol.rank_tol)
            decision_basis = decision.basis
            dimension = decision.dimension
            gap = decision.gap
            confidence = "high"
            if decision.gap < 10.0:
                confidence = "low"
                warnings.append(f"rank decision gap {decision.gap:.2f} below 10x margin")
            if prev.confidence == "low" or fresh.confidence == "low":
                confidence = "low"
        estimate = FiberEstimate(
            point=tuple(cpoint),
            depth=depth,
            basis=decision_basis,
            dimension=dimension,
            gap=gap,
            arc_count=arc_count,
            confidence=confidence,
            warnings=tuple(dict.fromkeys(warnings)),
        )
        with self._memo_lock:
            self._memo[key] = estimate
        return estimate

    # -- stabilization ---------------------------------------------------------

    def stabilization_index(self, probes: Sequence[Tuple[Sequence, Sequence]],
                            max_depth: Optional[int] = None):
        """Per-probe dimension profiles and the first depth with a fixed fiber.

        ``probes`` is a list of (point, samplers).  Returns a
        :class:`StabilizationReport`; when no depth p < max_depth satisfies
        fiber(p) == fiber(p+1) on every probe the report carries
        ``stabilized=False`` and rho_hat None.
        """
        budgets = self.cfg.budgets
        limit = max_depth if max_depth is not None else budgets.max_depth
        limit = min(limit, 2 * self.F.n)
        profiles: List[List[FiberEstimate]] = []
        for point, samplers in probes:
            row = [self.fiber(point, d, samplers) for d in range(1, limit + 1)]
            profiles.append(row)
        rho: Optional[int] = None
        for p in range(1, limit):
            stable = all(
                row[p - 1].dimension == row[p].dimension
                and subspaces_equal(
                    row[p - 1].basis, row[p].basis, self.cfg.tolerances.subspace_tol
                )
                for row in profiles
            )
            if stable:
                rho = p
                break
        return StabilizationReport(
            max_depth=limit,
            stabilized=rho is not None,
            rho_hat=rho,
            profiles=tuple(tuple(row) for row in profiles),
        )


@dataclass(frozen=True)
class StabilizationReport:
    max_depth: int
    stabilized: bool
    rho_hat: Optional[int]
    profiles: Tuple[Tuple[FiberEstimate, ...], ...]

    def dim_table(self) -> List[List[int]]:
        return [[est.dimension for est in row] for row in self.profiles]


# ---------------------------------------------------------------------------
# functoriality under coordinate changes


def compose_with_matrix(F: PolynomialMap, C: Sequence[Sequence]) -> PolynomialMap:
    """F o C for an exact square matrix C acting on the source coordinates."""
    ring = F.ring
    n = ring.arity
    images = []
    for i in range(n):
        img = ring.zero()
        for j in range(n):
            img = img + ring.variable(j).scale(C[i][j])
        images.append(img)
    return PolynomialMap(ring, tuple(f.substitute(images) for f in F.components))


def _exact_matrix_solve(C, rhs):
    """Solve C x = rhs exactly over Fractions/Gaussian rationals."""
    n = len(rhs)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(C)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("singular coordinate change")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


@dataclass(frozen=True)
class FunctorialProbeResult:
    point: Tuple[complex, ...]
    dim_direct: int
    dim_transformed: int
    basis_distance: float
    passed: bool


def functorial_transform_check(
    F: PolynomialMap,
    C: Sequence[Sequence],
    probes: Sequence[Sequence],
    config: RunConfig,
    depth: int = 1,
    tol: float = 1e-5,
) -> List[FunctorialProbeResult]:
    """Check that fibers of the composed map correspond under the pullback.

    For each probe a the fiber of F o C at C^(-1) a must equal the row-space
    image of F's fiber at a under right multiplication by C.
    """
    ring = F.ring
    exact_C = [[ring.coerce(v) for v in row] for row in C]
    G = compose_with_matrix(F, exact_C)
    engine_F = GlaeserEngine(F, config)
    engine_G = GlaeserEngine(G, config)
    C_num = np.array([[scalar_to_complex(v) for v in row] for row in exact_C])

    results = []
    for probe in probes:
        exact_probe = [ring.coerce(v) for v in probe]
        pre = _exact_matrix_solve(exact_C, exact_probe)
        est_F = engine_F.fiber(exact_probe, depth)
        est_G = engine_G.fiber(pre, depth)
        pulled = est_F.basis.rows @ C_num
        pulled_decision = span_of_covectors(pulled, F.n, config.tolerances.rank_tol)
        if est_G.dimension == pulled_decision.dimension and est_G.dimension > 0:
            from .subspaces import projector_distance

            dist = projector_distance(est_G.basis, pulled_decision.basis, kind="spec")
        else:
            dist = float("inf")
        results.append(
            FunctorialProbeResult(
                point=tuple(to_complex_point(probe)),
                dim_direct=est_F.dimension,
                dim_transformed=est_G.dimension,
                basis_distance=dist,
                passed=est_F.dimension == est_G.dimension and dist < tol,
            )
        )
    return results
