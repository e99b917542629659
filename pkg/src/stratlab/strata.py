"""Quasistratum classification, Lagrangian checks and the universality verdict.

Strata are supplied, not discovered: a :class:`StratumSpec` is either a
polynomial parametrization of a locus inside Sing(F) or an implicit
presentation (ambient equations plus exact sample points, for loci such as a
hyperbola that polynomial maps cannot parametrize).  Classification votes on
the modal fiber dimension over sampled points; the Lagrangian check combines
the dimension complement r + d = n with a bilinear orthogonality residual
between fiber covectors and tangent vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .arcs import Arc
from .fibers import ApproachCurve, FiberEstimate, GlaeserEngine, to_complex_point
from .poly import Polynomial, PolynomialRing
from .scalars import scalar_is_exact, scalar_to_complex
from .subspaces import SubspaceBasis, orthonormal_rows

PARAM_RANK_TOL = 1e-8


class StratumSpecError(ValueError):
    """A stratum specification failed validation against Sing(F)."""


@dataclass(frozen=True)
class StratumSpec:
    """A parametrized or implicitly presented locus inside Sing(F)."""

    name: str
    ambient: PolynomialRing
    param_ring: Optional[PolynomialRing] = None
    parametrization: Tuple[Polynomial, ...] = ()
    equations: Tuple[Polynomial, ...] = ()
    points: Tuple[Tuple, ...] = ()
    rejections: Tuple[Polynomial, ...] = ()        # ambient polys, must be nonzero
    param_rejections: Tuple[Polynomial, ...] = ()  # parameter polys, must be nonzero
    expected_fiber_dim: Optional[int] = None
    expected_dim: Optional[int] = None
    note: str = ""
    sample_lo: Fraction = Fraction(-2)
    sample_hi: Fraction = Fraction(2)
    sample_denominator: int = 8

    def __post_init__(self):
        if self.parametrization and self.param_ring is None:
            raise ValueError("parametrization requires a parameter ring")
        if not self.parametrization and not self.points:
            raise ValueError("spec needs a parametrization or explicit points")

    @property
    def is_parametric(self) -> bool:
        return bool(self.parametrization)

    @property
    def param_dim(self) -> int:
        return self.param_ring.arity if self.param_ring else 0

    # -- sampling ------------------------------------------------------------

    def _random_rational(self, rng: np.random.Generator) -> Fraction:
        den = self.sample_denominator
        lo = int(self.sample_lo * den)
        hi = int(self.sample_hi * den)
        return Fraction(int(rng.integers(lo, hi + 1)), den)

    def sample_params(self, rng: np.random.Generator, count: int,
                      max_tries: int = 2000) -> List[List[Fraction]]:
        out = []
        tries = 0
        while len(out) < count and tries < max_tries:
            tries += 1
            p = [self._random_rational(rng) for _ in range(self.param_dim)]
            if any(not g.evaluate(p) for g in self.param_rejections):
                continue
            image = self.image(p)
            if any(not g.evaluate(image) for g in self.rejections):
                continue
            out.append(p)
        if len(out) < count:
            raise StratumSpecError(
                f"stratum {self.name}: rejection sampling exhausted after {max_tries} tries"
            )
        return out

    def image(self, params: Sequence) -> List:
        exact = [self.param_ring.coerce(v) for v in params]
        return [p.evaluate(exact) for p in self.parametrization]

    def sample_points(self, rng: np.random.Generator, count: int) -> List[List]:
        if self.is_parametric:
            return [self.image(p) for p in self.sample_params(rng, count)]
        pts = [list(p) for p in self.points]
        if len(pts) < count:
            raise StratumSpecError(
                f"stratum {self.name}: only {len(pts)} explicit points, need {count}"
            )
        order = rng.permutation(len(pts))[:count]
        return [pts[i] for i in order]

    # -- tangent spaces --------------------------------------------------------

    def param_jacobian(self, params: Sequence) -> np.ndarray:
        cparams = [scalar_to_complex(v) if scalar_is_exact(v) else complex(v) for v in params]
        rows = []
        for p in self.parametrization:
            rows.append(
                [p.differentiate(j).evaluate_complex(cparams) for j in range(self.param_dim)]
            )
        return np.array(rows)  # (n, d): columns span the tangent

    def tangent_basis(self, at, engine_tol: float = PARAM_RANK_TOL) -> SubspaceBasis:
        """Orthonormal tangent rows at a parameter point (parametric) or an
        ambient point (implicit)."""
        n = self.ambient.arity
        if self.is_parametric:
            J = self.param_jacobian(at)
            if J.shape[1] == 0:
                return SubspaceBasis(np.zeros((0, n)), n)
            s = np.linalg.svd(J, compute_uv=False)
            rank = int(np.sum(s > engine_tol * max(1.0, s[0])))
            target = self.expected_dim if self.expected_dim is not None else rank
            if rank < target:
                raise StratumSpecError(
                    f"stratum {self.name}: singular parameter point (rank {rank} < {target})"
                )
            rows = orthonormal_rows(J.T, rank_tol=engine_tol)
            return SubspaceBasis(rows, n)
        cpoint = to_complex_point(at)
        if not self.equations:
            return SubspaceBasis(np.eye(n, dtype=complex), n)
        jac = np.array(
            [[g.differentiate(i).evaluate_complex(cpoint) for i in range(n)]
             for g in self.equations]
        )
        _, s, vh = np.linalg.svd(jac)
        rank = int(np.sum(s > engine_tol * max(1.0, s[0] if s.size else 1.0)))
        return SubspaceBasis(vh[rank:], n)

    def validate(self, rng: np.random.Generator, checks: int = 5) -> int:
        """Generic rank of the parametrization Jacobian (the stratum dimension)."""
        if not self.is_parametric:
            dims = [self.tangent_basis(p).dim for p in list(self.points)[:checks]]
            return max(dims) if dims else 0
        ranks = []
        for p in self.sample_params(rng, checks):
            J = self.param_jacobian(p)
            s = np.linalg.svd(J, compute_uv=False)
            ranks.append(int(np.sum(s > PARAM_RANK_TOL * max(1.0, s[0]))))
        rank = max(ranks)
        if self.expected_dim is not None and rank != self.expected_dim:
            raise StratumSpecError(
                f"stratum {self.name}: generic rank {rank} != declared dimension {self.expected_dim}"
            )
        return rank


# ---------------------------------------------------------------------------
# approach samplers for depth >= 2


@dataclass
class LocusSampler:
    """A stratum spec plus the data needed to approach points through it."""

    spec: StratumSpec
    known_preimages: Tuple[Tuple, ...] = ()
    ambient_arcs: Tuple[Arc, ...] = ()
    search_starts: int = 12
    match_tol: float = 1e-7
    preimage_solver: Optional[object] = None  # callable point -> param points | None
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.spec.name

    def specialize(self, preimage: np.ndarray) -> "LocusSampler":
        """Copy of this sampler that already knows one exact preimage."""
        return LocusSampler(
            spec=self.spec,
            known_preimages=(tuple(preimage),) + self.known_preimages,
            ambient_arcs=self.ambient_arcs,
            search_starts=self.search_starts,
            match_tol=self.match_tol,
            preimage_solver=self.preimage_solver,
        )

    def _image_numeric(self, params: np.ndarray) -> np.ndarray:
        return np.array([p.evaluate_complex(params) for p in self.spec.parametrization])

    def _known_numeric(self) -> List[np.ndarray]:
        out = []
        for p in self.known_preimages:
            out.append(np.array(
                [scalar_to_complex(v) if scalar_is_exact(v) else complex(v) for v in p]
            ))
        return out

    def _preimages(self, cpoint: np.ndarray, rng: np.random.Generator) -> List[np.ndarray]:
        key = tuple(np.round(cpoint, 9).tolist())
        if key in self._cache:
            return self._cache[key]
        found: List[np.ndarray] = []
        if self.spec.is_parametric:
            for cp in self._known_numeric():
                if np.linalg.norm(self._image_numeric(cp) - cpoint) < self.match_tol:
                    found.append(cp)
            if not found and self.preimage_solver is not None:
                solved = self.preimage_solver(cpoint)
                if solved is not None:
                    for p in solved:
                        cp = np.asarray(p, dtype=complex)
                        if np.linalg.norm(self._image_numeric(cp) - cpoint) < self.match_tol:
                            found.append(cp)
            if not found:
                found = self._search_preimages(cpoint, rng)
        self._cache[key] = found
        return found

    def _search_preimages(self, cpoint: np.ndarray, rng: np.random.Generator) -> List[np.ndarray]:
        d = self.spec.param_dim
        complex_params = self.spec.ambient.gaussian

        def unpack(z):
            return z[:d] + 1j * z[d:] if complex_params else z.astype(complex)

        def residuals(z):
            img = self._image_numeric(unpack(z))
            diff = img - cpoint
            return np.concatenate([diff.real, diff.imag])

        found: List[np.ndarray] = []
        dim = 2 * d if complex_params else d
        for _ in range(self.search_starts):
            x0 = rng.uniform(-1.5, 1.5, size=dim)
            try:
                res = least_squares(residuals, x0, method="trf", xtol=1e-15, ftol=1e-15)
            except Exception:
                continue
            p = unpack(res.x)
            if np.linalg.norm(self._image_numeric(p) - cpoint) > self.match_tol:
                continue
            if any(np.linalg.norm(p - q) < 1e-5 for q in found):
                continue
            found.append(p)
            if len(found) >= 4:
                break
        return found

    def approaches(self, cpoint: np.ndarray) -> bool:
        for arc in self.ambient_arcs:
            if np.linalg.norm(arc.base - cpoint) < self.match_tol:
                return True
        if not self.spec.is_parametric:
            # an explicit-point stratum reaches exactly its own points; a
            # point stratum admits only constant approach sequences, so depth
            # recursion on it degenerates to the fiber at the point itself
            for p in self.spec.points:
                pc = to_complex_point(p)
                if np.linalg.norm(pc - cpoint) < self.match_tol:
                    return True
            return False
        rng = np.random.default_rng(0x5EED)
        return bool(self._preimages(cpoint, rng))

    def approach_curves(self, cpoint: np.ndarray, rng: np.random.Generator,
                        n_dirs: int) -> List[ApproachCurve]:
        curves: List[ApproachCurve] = []
        for k, arc in enumerate(self.ambient_arcs):
            if np.linalg.norm(arc.base - cpoint) < self.match_tol:
                curves.append(ApproachCurve(f"{self.name}/arc{k}", arc.points))
        if not self.spec.is_parametric:
            return curves
        preimages = self._preimages(cpoint, rng)
        complex_params = self.spec.ambient.gaussian
        for pi, p0 in enumerate(preimages):
            for j in range(n_dirs):
                eta = rng.standard_normal(len(p0))
                if complex_params:
                    eta = eta + 1j * rng.standard_normal(len(p0))
                eta = eta / max(1.0, np.linalg.norm(eta))

                def points_fn(ts, p0=p0, eta=eta):
                    return np.array(
                        [self._image_numeric(p0 + t * eta) for t in np.asarray(ts)]
                    )

                def params_fn(t, p0=p0, eta=eta):
                    return p0 + t * eta

                curves.append(
                    ApproachCurve(f"{self.name}/p{pi}d{j}", points_fn, self, params_fn)
                )
        return curves


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassifyResult:
    name: str
    fiber_dim: int
    dims: Tuple[int, ...]
    agreement: float
    inconclusive: bool
    estimates: Tuple[FiberEstimate, ...]
    sample_points: Tuple[Tuple, ...]
    sample_params: Tuple[Tuple, ...]


def classify_quasistratum(
    engine: GlaeserEngine,
    spec: StratumSpec,
    depth: int,
    samplers: Sequence[LocusSampler] = (),
    min_samples: int = 20,
    rng: Optional[np.random.Generator] = None,
) -> ClassifyResult:
    """Modal fiber dimension over sampled stratum points at the given depth."""
    rng = rng if rng is not None else engine._rng("classify", spec.name)
    if spec.is_parametric:
        params = spec.sample_params(rng, min_samples)
        points = [spec.image(p) for p in params]
    else:
        params = []
        points = spec.sample_points(rng, min_samples)

    sing_tol = engine.cfg.tolerances.sing_tol
    estimates = []
    for pt in points:
        cpt = to_complex_point(pt)
        residual = engine.sing_residual(cpt)
        if residual > sing_tol:
            raise StratumSpecError(
                f"stratum {spec.name}: sample {cpt} off Sing(F) (residual {residual:.1e})"
            )
        estimates.append(engine.fiber(pt, depth, samplers))
    dims = [e.dimension for e in estimates]
    counts: Dict[int, int] = {}
    for d in dims:
        counts[d] = counts.get(d, 0) + 1
    modal = max(sorted(counts), key=lambda d: counts[d])
    agreement = counts[modal] / len(dims)
    return ClassifyResult(
        name=spec.name,
        fiber_dim=modal,
        dims=tuple(dims),
        agreement=agreement,
        inconclusive=agreement < 0.8,
        estimates=tuple(estimates),
        sample_points=tuple(tuple(p) for p in points),
        sample_params=tuple(tuple(p) for p in params),
    )


@dataclass(frozen=True)
class QuasistratumReport:
    name: str
    fiber_dim: int
    stratum_dim: int
    lagrangian: str            # "yes" | "no" | "inconclusive"
    residual: float
    sample_count: int
    confidence: str            # "high" | "low"
    notes: Tuple[str, ...] = ()


def lagrangian_check(
    engine: GlaeserEngine,
    spec: StratumSpec,
    depth: int,
    samplers: Sequence[LocusSampler] = (),
    ortho_tol: Optional[float] = None,
    min_samples: int = 20,
    rng: Optional[np.random.Generator] = None,
    classified: Optional[ClassifyResult] = None,
) -> QuasistratumReport:
    """Check r + d = n and fiber-tangent orthogonality over stratum samples.

    The pairing is the bilinear one (covectors act linearly, no conjugation);
    failures land in the verdict, not in exceptions.
    """
    tol = ortho_tol if ortho_tol is not None else engine.cfg.tolerances.ortho_tol
    result = classified or classify_quasistratum(
        engine, spec, depth, samplers, min_samples, rng
    )
    n = engine.F.n
    notes: List[str] = []

    dims = []
    residual = 0.0
    anchors = result.sample_params if spec.is_parametric else result.sample_points
    for anchor, est in zip(anchors, result.estimates):
        try:
            tangent = spec.tangent_basis(list(anchor))
        except StratumSpecError as exc:
            notes.append(str(exc))
            continue
        dims.append(tangent.dim)
        if est.dimension != result.fiber_dim:
            continue  # off-modal samples do not vote on orthogonality
        if tangent.dim and est.basis.dim:
            pairing = est.basis.rows @ tangent.rows.T  # bilinear pairing
            residual = max(residual, float(np.max(np.abs(pairing))))
    stratum_dim = max(set(dims), key=dims.count) if dims else 0

    complement = result.fiber_dim + stratum_dim == n
    confidence = "low" if result.inconclusive else "high"
    if result.inconclusive:
        notes.append(
            f"fiber-dimension vote split: {result.agreement:.0%} for {result.fiber_dim}"
        )

    if not complement:
        status = "no" if confidence == "high" else "inconclusive"
        notes.append(
            f"fiber dim {result.fiber_dim} + stratum dim {stratum_dim} != ambient {n}"
        )
    elif residual < tol:
        status = "yes" if confidence == "high" else "inconclusive"
    elif residual < 100 * tol:
        status = "inconclusive"
        notes.append(f"orthogonality residual {residual:.2e} in the gray zone")
    else:
        status = "no" if confidence == "high" else "inconclusive"
        notes.append(f"orthogonality residual {residual:.2e} above 100x tolerance")

    return QuasistratumReport(
        name=spec.name,
        fiber_dim=result.fiber_dim,
        stratum_dim=stratum_dim,
        lagrangian=status,
        residual=residual,
        sample_count=len(result.estimates),
        confidence=confidence,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class StratReport:
    quasistrata: Tuple[QuasistratumReport, ...]
    rho_hat: Optional[int]
    stabilized: bool
    verdict: str               # "functorial_universal" | "no_universal" | "inconclusive"
    justification: str
    caveats: Tuple[str, ...] = ()


def universality_verdict(
    reports: Sequence[QuasistratumReport],
    rho_hat: Optional[int],
    stabilized: bool = True,
    l: int = 1,
) -> StratReport:
    """Fold per-quasistratum Lagrangian statuses into the overall verdict.

    Any high-confidence non-Lagrangian quasistratum rules out a universal
    stratification; all-Lagrangian reports certify the quasistratum partition
    as the coarsest universal one.  Coverage completeness is the caller's
    responsibility and is echoed in the justification.
    """
    if not reports:
        raise ValueError("verdict requires at least one quasistratum report")
    ordered = sorted(reports, key=lambda r: r.name)
    caveats: List[str] = []
    if l > 1:
        caveats.append(
            "map has more than one component: existence of a Thom stratification "
            "is not guaranteed, verdict is conditional on it"
        )
    offenders = [r for r in ordered if r.lagrangian == "no" and r.confidence == "high"]
    undecided = [r for r in ordered if r.lagrangian == "inconclusive" or r.confidence == "low"]
    names = ", ".join(r.name for r in ordered)
    if offenders:
        verdict = "no_universal"
        justification = (
            f"quasistratum {offenders[0].name} is not Lagrangian "
            f"(fiber dim {offenders[0].fiber_dim}, stratum dim {offenders[0].stratum_dim}); "
            f"no universal stratification exists. Checked strata: {names} "
            "(coverage supplied by the caller)."
        )
    elif undecided:
        verdict = "inconclusive"
        justification = (
            f"undecided quasistrata: {', '.join(r.name for r in undecided)}. "
            f"Checked strata: {names} (coverage supplied by the caller)."
        )
    else:
        verdict = "functorial_universal"
        justification = (
            f"all checked quasistrata ({names}) are Lagrangian; their partition is "
            "the coarsest universal stratification and is functorial "
            "(coverage supplied by the caller)."
        )
    return StratReport(
        quasistrata=tuple(ordered),
        rho_hat=rho_hat,
        stabilized=stabilized,
        verdict=verdict,
        justification=justification,
        caveats=tuple(caveats),
    )
