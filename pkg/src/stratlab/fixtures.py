"""Executable worked examples with frozen expected values.

Each fixture bundles a polynomial map, stratum specifications with expected
fiber/stratum dimensions and Lagrangian statuses, probe points with expected
depth-wise fiber dimensions, the expected stabilization index and the expected
universality verdict.  Every expectation carries a ``note`` string recording
the derivation of the value (locus description plus the limit computation
behind it).  ``replay`` runs a case through the numeric pipeline and reports
pass/fail per expectation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arcs import Arc
from .config import Budgets, RunConfig, preset
from .fibers import GlaeserEngine, to_complex_point
from .parsing import parse_polynomial
from .poly import Polynomial, PolynomialMap, PolynomialRing
from .scalars import GaussianRational, I_UNIT, scalar_to_complex
from .strata import (
    LocusSampler,
    StratumSpec,
    classify_quasistratum,
    lagrangian_check,
    universality_verdict,
)
from .subspaces import projective_distance

F0 = Fraction(0)
F1 = Fraction(1)


@dataclass(frozen=True)
class Expectation:
    value: object
    note: str

    def __post_init__(self):
        if not self.note:
            raise ValueError("every expectation carries a derivation note")


@dataclass(frozen=True)
class FixtureStratum:
    spec: StratumSpec
    expected_fiber_dim: Expectation
    expected_dim: Expectation
    expected_lagrangian: Expectation
    classify_depth: int = 1
    samplers: Tuple[LocusSampler, ...] = ()
    in_verdict: bool = True


@dataclass(frozen=True)
class FixtureProbe:
    name: str
    point: Tuple
    expected_dims: Tuple[Tuple[int, Expectation], ...]
    samplers: Tuple[LocusSampler, ...] = ()
    expected_basis: Optional[Tuple[Tuple[float, ...], ...]] = None
    basis_note: str = ""


@dataclass(frozen=True)
class FixtureCase:
    name: str
    description: str
    field_name: str
    ring: PolynomialRing
    F: PolynomialMap
    strata: Tuple[FixtureStratum, ...]
    probes: Tuple[FixtureProbe, ...]
    expected_rho: Optional[Expectation]
    expected_verdict: Optional[Expectation]
    max_depth: int = 2
    min_samples: int = 20
    caveats: Tuple[str, ...] = ()
    default_seed: int = 20240601


def _ring(names: Sequence[str], field_name: str) -> PolynomialRing:
    kind = "gaussian_rational" if field_name == "C" else "rational"
    return PolynomialRing(tuple(names), kind)


def _origin_spec(name: str, ring: PolynomialRing, copies: int = 20) -> StratumSpec:
    zero = tuple(F0 for _ in ring.variables)
    return StratumSpec(
        name=name,
        ambient=ring,
        equations=tuple(ring.variable(i) for i in range(ring.arity)),
        points=tuple(zero for _ in range(copies)),
        expected_dim=0,
    )


# ---------------------------------------------------------------------------
# quadratic forms in n variables


def quad_forms_family(n: int) -> FixtureCase:
    """Universal family of quadratic forms: rank strata, all Lagrangian.

    Over the coefficient-plus-point space the singular locus is {x = 0}; over
    a rank-q form the fiber is spanned by all dx_i plus the degree-2 Veronese
    directions of the kernel, giving k(q) = n + (n-q)(n-q+1)/2, while the
    rank-q locus has dimension q*n - q(q-1)/2.
    """
    if not 2 <= n <= 3:
        raise ValueError("supported range: 2 <= n <= 3")
    coeff_names = [f"a{i}{j}" for i in range(1, n + 1) for j in range(i, n + 1)]
    x_names = [f"x{i}" for i in range(1, n + 1)]
    ring = _ring(coeff_names + x_names, "R")
    terms = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            terms.append(f"a{i}{j}*x{i}*x{j}")
    f = parse_polynomial(" + ".join(terms), ring)
    F = PolynomialMap(ring, (f,))
    N = ring.arity

    def k_of(q):
        return n + (n - q) * (n - q + 1) // 2

    def d_of(q):
        return q * n - q * (q - 1) // 2

    def pair_index(i, j):
        # position of a_ij (i <= j) in the coefficient block
        pos = 0
        for r in range(1, n + 1):
            for c in range(r, n + 1):
                if (r, c) == (i, j):
                    return pos
                pos += 1
        raise KeyError((i, j))

    def rank_witness(q):
        """Ambient polynomial: sum of squares of all q-minors of the form."""
        if q == 0:
            return None
        qring = ring
        entries = [[None] * n for _ in range(n)]
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                idx = pair_index(i, j)
                var = qring.variable(idx)
                coeff = F1 if i == j else Fraction(1, 2)
                entries[i - 1][j - 1] = var.scale(coeff)
                entries[j - 1][i - 1] = var.scale(coeff)
        from .poly import PolyMatrix, minors as all_minors

        M = PolyMatrix(qring, entries)
        total = qring.zero()
        for m in all_minors(M, q):
            total = total + m * m
        return total

    def stratum(q: int) -> Tuple[StratumSpec, Tuple]:
        if q == 0:
            return _origin_spec(f"rank0", ring), ()
        pnames = [f"m{r}{s}" for r in range(1, n + 1) for s in range(1, q + 1)]
        pring = _ring(pnames, "R")

        def mvar(r, s):
            return pring.variable(pnames.index(f"m{r}{s}"))

        images = []
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                acc = pring.zero()
                for s in range(1, q + 1):
                    acc = acc + mvar(i, s) * mvar(j, s)
                if i != j:
                    acc = acc.scale(2)
                images.append(acc)
        images += [pring.zero() for _ in range(n)]
        witness = rank_witness(q)
        return (
            StratumSpec(
                name=f"rank{q}",
                ambient=ring,
                param_ring=pring,
                parametrization=tuple(images),
                rejections=(witness,) if witness is not None else (),
                expected_dim=d_of(q),
            ),
            (),
        )

    # deterministic probe matrices with full generic rank
    seed_matrix = [[1, 1, 0], [1, 2, 1], [0, 1, 3]]
    strata = []
    probes = []
    for q in range(n, -1, -1):
        spec, _ = stratum(q)
        note_k = (
            f"rank-{q} form: fiber = span(all dx_i) + Veronese square directions of the "
            f"{n - q}-dim kernel; k({q}) = {n} + {(n - q) * (n - q + 1) // 2} = {k_of(q)}"
        )
        note_d = (
            f"rank-{q} symmetric matrices via M*M^T with M of shape {n}x{q}: "
            f"dimension {q}*{n} - {q * (q - 1) // 2} = {d_of(q)}"
        )
        sampler = LocusSampler(spec) if spec.is_parametric else LocusSampler(spec)
        strata.append(
            FixtureStratum(
                spec=spec,
                expected_fiber_dim=Expectation(k_of(q), note_k),
                expected_dim=Expectation(d_of(q), note_d),
                expected_lagrangian=Expectation(
                    "yes", f"k({q}) + dim = {k_of(q)} + {d_of(q)} = {N}; "
                    "kernel Veronese covectors annihilate tangent moves M -> M + dM"
                ),
                classify_depth=1,
                samplers=(sampler,),
            )
        )
        # probe with exact preimage in its own stratum (and in the bigger ones)
        if q == 0:
            point = tuple(F0 for _ in range(N))
            probe_samplers = []
            for q2 in range(1, n + 1):
                spec2, _ = stratum(q2)
                pre = tuple(F0 for _ in range(n * q2))
                probe_samplers.append(LocusSampler(spec2, known_preimages=(pre,)))
            probe_samplers.append(LocusSampler(spec))
        else:
            M0 = [[Fraction(seed_matrix[r][s]) for s in range(q)] for r in range(n)]
            pre = tuple(M0[r][s] for r in range(n) for s in range(q))
            point_params = list(pre)
            point = tuple(spec.image(point_params))
            probe_samplers = [LocusSampler(spec, known_preimages=(pre,))]
            for q2 in range(q + 1, n + 1):
                spec2, _ = stratum(q2)
                pre2 = tuple(
                    M0[r][s] if s < q else F0 for r in range(n) for s in range(q2)
                )
                probe_samplers.append(LocusSampler(spec2, known_preimages=(pre2,)))
        probes.append(
            FixtureProbe(
                name=f"rank{q}_probe",
                point=point,
                expected_dims=tuple(
                    (depth, Expectation(k_of(q), note_k)) for depth in (1, 2)
                ),
                samplers=tuple(probe_samplers),
            )
        )

    return FixtureCase(
        name=f"quad_forms_n{n}",
        description=f"universal quadratic-form family in {n} variables "
        f"({N} ambient coordinates)",
        field_name="R",
        ring=ring,
        F=F,
        strata=tuple(strata),
        probes=tuple(probes),
        expected_rho=Expectation(
            1, "one close-then-span step already yields all rank-locus fibers"
        ),
        expected_verdict=Expectation(
            "functorial_universal", "every rank stratum satisfies k(q) + dim = ambient "
            "with exact orthogonality"
        ),
        max_depth=2,
    )


# ---------------------------------------------------------------------------
# the recursive family with stabilization index n


def _recursive_polynomial(n: int, ring: PolynomialRing) -> Polynomial:
    q = parse_polynomial("u1*x1^2 + 2*w*x1*y1 + v1*y1^2", ring)
    for k in range(2, n + 1):
        text = f"u{k}*x{k}^2 + v{k}*y{k}^2"
        qk = parse_polynomial(text, ring)
        xk = ring.variable(ring.index_of(f"x{k}"))
        yk = ring.variable(ring.index_of(f"y{k}"))
        q = qk + (xk * yk * q).scale(2)
    return q


def recursive_family(n: int) -> FixtureCase:
    """Nested quadratic family in 4n+1 variables with stabilization index n."""
    if not 1 <= n <= 2:
        raise ValueError("supported range: 1 <= n <= 2")
    names = ["u1", "v1", "x1", "y1", "w"]
    for k in range(2, n + 1):
        names += [f"u{k}", f"v{k}", f"x{k}", f"y{k}"]
    ring = _ring(names, "C")
    f = _recursive_polynomial(n, ring)
    F = PolynomialMap(ring, (f,))
    N = ring.arity
    idx = {name: i for i, name in enumerate(names)}

    def zero_point(assign: Dict[str, object]) -> Tuple:
        point = [F0] * N
        for k, v in assign.items():
            point[idx[k]] = v
        return tuple(point)

    if n == 1:
        g2 = StratumSpec(
            name="G2", ambient=ring,
            param_ring=_ring(["u", "v", "s"], "C"),
            parametrization=tuple(
                parse_polynomial(t, _ring(["u", "v", "s"], "C"))
                for t in ("u", "v", "0", "0", "s")
            ),
            rejections=(parse_polynomial("u1*v1 - w^2", ring),),
            expected_dim=3,
        )
        pr = _ring(["a", "b"], "C")
        g3 = StratumSpec(
            name="G3", ambient=ring,
            param_ring=pr,
            parametrization=tuple(parse_polynomial(t, pr) for t in ("a^2", "b^2", "0", "0", "a*b")),
            expected_dim=2,
        )
        g5 = _origin_spec("G5", ring)
        strata = (
            FixtureStratum(
                g2, Expectation(2, "nondegenerate quadratic part: limits of the gradient "
                                   "span exactly {dx1, dy1}"),
                Expectation(3, "free coefficients (u1, v1, w) on {x1 = y1 = 0}"),
                Expectation("yes", "2 + 3 = 5 and dx1, dy1 annihilate coefficient moves"),
                samplers=(LocusSampler(g2),),
            ),
            FixtureStratum(
                g3, Expectation(3, "rank-1 quadratic part: kernel arcs add the determinant "
                                   "differential d(u1*v1 - w^2) to {dx1, dy1}"),
                Expectation(2, "chart (a,b) -> (a^2, b^2, a*b) of the determinant surface"),
                Expectation("yes", "3 + 2 = 5; d(u1*v1-w^2) annihilates the chart tangents"),
                samplers=(LocusSampler(g3),),
            ),
            FixtureStratum(
                g5, Expectation(5, "all coefficient and point directions arise as limits "
                                   "at the deepest point"),
                Expectation(0, "single point"),
                Expectation("yes", "5 + 0 = 5"),
                samplers=(LocusSampler(g5),),
            ),
        )
        probes = (
            FixtureProbe(
                "G2_probe", zero_point({"u1": F1, "v1": Fraction(2), "w": F1}),
                ((1, Expectation(2, "see G2 stratum note")),
                 (2, Expectation(2, "already stabilized at depth 1"))),
                samplers=(LocusSampler(g2, known_preimages=((F1, Fraction(2), F1),)),),
            ),
            FixtureProbe(
                "G3_probe", zero_point({"u1": F1, "v1": F1, "w": F1}),
                ((1, Expectation(3, "see G3 stratum note")),
                 (2, Expectation(3, "already stabilized at depth 1"))),
                samplers=(LocusSampler(g3, known_preimages=((F1, F1),)),),
            ),
            FixtureProbe(
                "G5_probe", zero_point({}),
                ((1, Expectation(5, "see G5 stratum note")),
                 (2, Expectation(5, "already stabilized at depth 1"))),
                samplers=(LocusSampler(g3, known_preimages=((F0, F0),)),
                          LocusSampler(g5)),
            ),
        )
        return FixtureCase(
            name="recursive_n1",
            description="nested quadratic family, one level (5 variables)",
            field_name="C", ring=ring, F=F,
            strata=strata, probes=probes,
            expected_rho=Expectation(1, "single level: one step stabilizes"),
            expected_verdict=Expectation("functorial_universal",
                                         "all three quasistrata are Lagrangian"),
            max_depth=2,
        )

    # ---- n == 2 ----------------------------------------------------------
    pg2 = _ring(["u", "v", "a", "b", "s", "p", "q"], "C")
    g2 = StratumSpec(
        name="G2", ambient=ring, param_ring=pg2,
        parametrization=tuple(parse_polynomial(t, pg2)
                              for t in ("u", "v", "a", "b", "s", "p", "q", "0", "0")),
        rejections=(
            parse_polynomial("u2*v2 - (u1*x1^2 + 2*w*x1*y1 + v1*y1^2)^2", ring),
        ),
        expected_dim=7,
    )
    pg3 = _ring(["a", "b", "r", "x", "u", "ww"], "C")
    # cone chart: (x1, y1) = r*(x, 1), inner value q1 = r^2*a*b via
    # v1 = a*b - u*x^2 - 2*ww*x, and u2 = r^2*a^2, v2 = r^2*b^2, so that
    # u2*v2 = (r^2*a*b)^2 = q1^2 with all six parameters independent
    g3 = StratumSpec(
        name="G3", ambient=ring, param_ring=pg3,
        parametrization=tuple(parse_polynomial(t, pg3) for t in (
            "u", "a*b - u*x^2 - 2*ww*x", "r*x", "r",
            "ww", "r^2*a^2", "r^2*b^2", "0", "0",
        )),
        param_rejections=tuple(parse_polynomial(t, pg3) for t in ("a", "b", "r")),
        expected_dim=6,
    )
    pg5 = _ring(["lam", "mu", "v", "ww"], "C")
    g5 = StratumSpec(
        name="G5", ambient=ring, param_ring=pg5,
        parametrization=tuple(parse_polynomial(t, pg5) for t in (
            "-2*ww*mu - v*mu^2", "v", "lam", "mu*lam", "ww", "0", "0", "0", "0",
        )),
        param_rejections=tuple(parse_polynomial(t, pg5) for t in ("lam", "mu", "ww + v*mu")),
        expected_dim=4,
    )
    pg6 = _ring(["u", "v", "s"], "C")
    g6 = StratumSpec(
        name="G6", ambient=ring, param_ring=pg6,
        parametrization=tuple(parse_polynomial(t, pg6)
                              for t in ("u", "v", "0", "0", "s", "0", "0", "0", "0")),
        rejections=(parse_polynomial("u1*v1 - w^2", ring),),
        expected_dim=3,
    )
    g9 = _origin_spec("G9", ring)

    def g5_solver(cpoint: np.ndarray):
        """Exact quadratic-formula preimages of inner-locus points.

        Points of the closure of the inner vanishing locus with x1 = y1 = 0
        have preimages (0, mu, v1, w) with v1 mu^2 + 2 w mu + u1 = 0."""
        if max(abs(cpoint[i]) for i in (2, 3, 5, 6, 7, 8)) > 1e-9:
            return None
        u1, v1, w = cpoint[0], cpoint[1], cpoint[4]
        if abs(u1) < 1e-12 and abs(v1) < 1e-12 and abs(w) < 1e-12:
            return [np.array([0, m, 0, 0], dtype=complex) for m in (1.0, -1.0, 2.0)]
        if abs(v1) < 1e-12:
            if abs(w) < 1e-12:
                return []
            mu = -u1 / (2 * w)
            return [np.array([0, mu, v1, w], dtype=complex)]
        disc = np.sqrt(complex(w * w - u1 * v1))
        out = []
        for sign in (1, -1):
            mu = (-w + sign * disc) / v1
            out.append(np.array([0, mu, v1, w], dtype=complex))
        return out

    g5_sampler = LocusSampler(g5, preimage_solver=g5_solver)

    d1_note = "limits see only the outer-level coefficient and point directions"
    deep_note = ("inner-level differentials enter through limits of inner-locus "
                 "fibers along curves into the probe")
    strata = (
        FixtureStratum(
            g2, Expectation(2, "nondegenerate outer quadratic: fiber {dx2, dy2}"),
            Expectation(7, "all coordinates except x2, y2 are free"),
            Expectation("yes", "2 + 7 = 9"),
            samplers=(LocusSampler(g2),),
        ),
        FixtureStratum(
            g3, Expectation(3, "rank-1 outer quadratic: add the outer determinant "
                               "differential to {dx2, dy2}"),
            Expectation(6, "chart of the codim-1 determinant hypersurface in Sing"),
            Expectation("yes", "3 + 6 = 9"),
            samplers=(LocusSampler(g3),),
        ),
        FixtureStratum(
            g5, Expectation(5, "outer coefficients vanish, inner gradient survives: "
                               "{dx2, dy2, du2, dv2} + inner-differential direction"),
            Expectation(4, "chart (lam, mu, v, w) of the inner null cone"),
            Expectation("yes", "5 + 4 = 9"),
            samplers=(g5_sampler,),
        ),
        FixtureStratum(
            g6, Expectation(6, deep_note + "; two inner root branches give dx1, dy1 "
                                           "on top of the four outer directions"),
            Expectation(3, "free (u1, v1, w) with x's and y's zero"),
            Expectation("yes", "6 + 3 = 9"),
            classify_depth=2,
            samplers=(g5_sampler,),
        ),
        FixtureStratum(
            g9, Expectation(9, deep_note + "; at the origin every direction arises, "
                                           "including dw through varying root slopes"),
            Expectation(0, "single point"),
            Expectation("yes", "9 + 0 = 9"),
            classify_depth=2,
            samplers=(g5_sampler,),
        ),
    )
    one = GaussianRational(F1, F0)
    zero = GaussianRational(F0, F0)
    z1_probe_samplers = (
        LocusSampler(g5, known_preimages=((zero, I_UNIT, one, zero),
                                          (zero, -I_UNIT, one, zero)),
                     preimage_solver=g5_solver),
        LocusSampler(g6, known_preimages=((F1, F1, F0),)),
    )
    probes = (
        FixtureProbe(
            "G2_probe",
            zero_point({"u1": F1, "v1": F1, "x1": F1, "w": F1,
                        "u2": Fraction(3), "v2": F1}),
            ((1, Expectation(2, "outer determinant nonzero")),
             (2, Expectation(2, "stable"))),
            samplers=(LocusSampler(g2, known_preimages=(
                (F1, F1, F1, F0, F1, Fraction(3), F1),)),),
        ),
        FixtureProbe(
            "G3_probe",
            zero_point({"u1": F1, "v1": Fraction(-2), "x1": F1, "y1": F1, "w": F1,
                        "u2": F1, "v2": F1}),
            ((1, Expectation(3, "outer determinant vanishes to first order")),
             (2, Expectation(3, "stable"))),
            samplers=(LocusSampler(g3, known_preimages=(
                (F1, F1, F1, F1, F1, F1),)),),
        ),
        FixtureProbe(
            "G5_probe",
            zero_point({"v1": Fraction(5), "x1": F1, "w": F1}),
            ((1, Expectation(5, "inner differential survives in the quadratic layer")),
             (2, Expectation(5, "stable"))),
            samplers=(LocusSampler(g5, known_preimages=(
                (F1, F0, Fraction(5), F1),)),),
        ),
        FixtureProbe(
            "Z1_probe",
            zero_point({"u1": F1, "v1": F1}),
            ((1, Expectation(4, "only the four outer directions at depth 1")),
             (2, Expectation(6, "two inner root branches contribute dx1 and dy1")),
             (3, Expectation(6, "stabilized at depth 2"))),
            samplers=z1_probe_samplers,
        ),
        FixtureProbe(
            "G9_probe",
            zero_point({}),
            ((1, Expectation(4, "only outer directions in the leading layer")),
             (2, Expectation(9, "inner-locus curves with varying root slope give "
                                "all inner directions including dw")),
             (3, Expectation(9, "stabilized at depth 2"))),
            samplers=(
                LocusSampler(
                    g5,
                    known_preimages=(
                        (zero, one, zero, zero),
                        (zero, -one, zero, zero),
                        (zero, GaussianRational(Fraction(2), F0), zero, zero),
                    ),
                    preimage_solver=g5_solver,
                ),
            ),
        ),
    )
    return FixtureCase(
        name="recursive_n2",
        description="nested quadratic family, two levels (9 variables)",
        field_name="C", ring=ring, F=F,
        strata=strata, probes=probes,
        expected_rho=Expectation(2, "inner-level directions appear only at depth 2"),
        expected_verdict=Expectation("functorial_universal",
                                     "all quasistrata are Lagrangian"),
        max_depth=3,
        default_seed=20240602,
    )


# ---------------------------------------------------------------------------
# the squared-middle-coefficient example: no universal stratification


def w_squared_example() -> FixtureCase:
    """f = u*x^2 + 2*w^2*x*y + v*y^2: the deepest quasistratum is a point of
    codimension 5 carrying a 4-dimensional fiber, so it cannot be Lagrangian
    and no universal stratification exists."""
    ring = _ring(["u", "v", "w", "x", "y"], "R")
    f = parse_polynomial("u*x^2 + 2*w^2*x*y + v*y^2", ring)
    F = PolynomialMap(ring, (f,))

    pg2 = _ring(["u", "v", "s"], "R")
    g2 = StratumSpec(
        name="G2", ambient=ring, param_ring=pg2,
        parametrization=tuple(parse_polynomial(t, pg2)
                              for t in ("u", "v", "s", "0", "0")),
        rejections=(parse_polynomial("u*v - w^4", ring),),
        expected_dim=3,
    )
    pg3 = _ring(["a", "b"], "R")
    g3 = StratumSpec(
        name="G3", ambient=ring, param_ring=pg3,
        parametrization=tuple(parse_polynomial(t, pg3)
                              for t in ("a^4", "b^4", "a*b", "0", "0")),
        expected_dim=2,
    )
    g4 = _origin_spec("G4", ring)
    pcurve = _ring(["s"], "R")
    curve = StratumSpec(
        name="G3_curve", ambient=ring, param_ring=pcurve,
        parametrization=tuple(parse_polynomial(t, pcurve)
                              for t in ("s^2", "s^2", "s", "0", "0")),
        expected_dim=1,
    )
    curve_sampler = LocusSampler(curve, known_preimages=((F0,),))
    g3_sampler = LocusSampler(g3, known_preimages=((F0, F0),))

    strata = (
        FixtureStratum(
            g2, Expectation(2, "nondegenerate quadratic part: fiber {dx, dy}"),
            Expectation(3, "free (u, v, w) off the discriminant"),
            Expectation("yes", "2 + 3 = 5"),
            samplers=(LocusSampler(g2),),
        ),
        FixtureStratum(
            g3, Expectation(3, "rank-1 quadratic part: kernel arcs add "
                               "d(u*v - w^4) = v du + u dv - 4w^3 dw"),
            Expectation(2, "chart (a,b) -> (a^4, b^4, a*b) of {u*v = w^4}"),
            Expectation("yes", "3 + 2 = 5; d(u*v - w^4) kills both chart tangents"),
            samplers=(LocusSampler(g3),),
        ),
        FixtureStratum(
            g4, Expectation(4, "at the origin limits span {dx, dy, du, dv} and the "
                               "dw-coefficient 4*w*x*y is always dominated"),
            Expectation(0, "single point"),
            Expectation("no", "4 + 0 = 4 != 5: complement condition fails"),
            samplers=(g3_sampler, curve_sampler, LocusSampler(g4)),
        ),
        FixtureStratum(
            curve, Expectation(3, "curve sits inside the rank-1 locus with "
                                  "+-(1,-1) kernel directions"),
            Expectation(1, "one-parameter curve"),
            Expectation("no", "auxiliary curve, not a quasistratum: 3 + 1 != 5"),
            in_verdict=False,
            samplers=(curve_sampler,),
        ),
    )
    probes = (
        FixtureProbe(
            "G2_probe", (F1, Fraction(2), F1, F0, F0),
            ((1, Expectation(2, "u*v - w^4 = 1 at the probe")),
             (2, Expectation(2, "stable"))),
            samplers=(LocusSampler(g2, known_preimages=((F1, Fraction(2), F1),)),),
        ),
        FixtureProbe(
            "G3_probe", (F1, F1, F1, F0, F0),
            ((1, Expectation(3, "u*v - w^4 = 0, differential nonzero")),
             (2, Expectation(3, "stable"))),
            samplers=(LocusSampler(g3, known_preimages=((F1, F1),)),),
        ),
        FixtureProbe(
            "curve_probe", (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2), F0, F0),
            ((1, Expectation(3, "curve point: u*v - w^4 = 0 with (u, v) nonzero")),),
            samplers=(curve_sampler.specialize(np.array([0.5])),),
        ),
        FixtureProbe(
            "G4_probe", (F0, F0, F0, F0, F0),
            ((1, Expectation(4, "see G4 stratum note")),
             (2, Expectation(4, "limits of rank-1-locus fibers stay inside "
                                "{dx, dy, du, dv}"))),
            samplers=(g3_sampler, curve_sampler),
        ),
    )
    return FixtureCase(
        name="w_squared_example",
        description="squared middle coefficient: no universal stratification",
        field_name="R", ring=ring, F=F,
        strata=strata, probes=probes,
        expected_rho=Expectation(1, "the first span already contains every later limit"),
        expected_verdict=Expectation("no_universal",
                                     "G4 has fiber dim 4 but codimension 5"),
        max_depth=2,
    )


# ---------------------------------------------------------------------------
# arbitrary hypersurface appearing as a quasistratum


def hypersurface_quasistratum(g_text: str, z_names: Sequence[str],
                              g4_points: Optional[Sequence[Tuple]] = None,
                              min_samples: int = 20) -> FixtureCase:
    """f = u*x^2 + 2*g(z)^2*x*y + v*y^2: the chosen hypersurface {g = 0}
    appears inside the deepest quasistratum {x=y=u=v=0, g=0}."""
    m = len(z_names)
    if not 1 <= m <= 3:
        raise ValueError("supported range: 1 <= m <= 3 hypersurface variables")
    zring = _ring(z_names, "R")
    g = parse_polynomial(g_text, zring)
    if g.is_constant():
        raise ValueError("g must be nonconstant")
    ring = _ring(["u", "v", "x", "y", *z_names], "R")
    gz = g.rename_ring(ring)
    n = ring.arity
    f = (
        ring.variable(0) * ring.variable(2) ** 2
        + (gz * gz * ring.variable(2) * ring.variable(3)).scale(2)
        + ring.variable(1) * ring.variable(3) ** 2
    )
    F = PolynomialMap(ring, (f,))

    rng = np.random.default_rng(1234321)

    def rand_frac(nonzero=False):
        while True:
            v = Fraction(int(rng.integers(-16, 17)), 8)
            if not nonzero or v != 0:
                return v

    pg2 = _ring(["uu", "vv", *[f"t{i}" for i in range(m)]], "R")
    g2 = StratumSpec(
        name="G2", ambient=ring, param_ring=pg2,
        parametrization=tuple(
            parse_polynomial(t, pg2) for t in ("uu", "vv", "0", "0",
                                               *[f"t{i}" for i in range(m)])
        ),
        rejections=(ring.variable(0) * ring.variable(1) - gz ** 4,),
        expected_dim=m + 2,
    )

    # G3 = {x=y=0, u*v = g^4, (u,v) != 0}: explicit exact points (v = g^4/u)
    g3_pts = []
    while len(g3_pts) < max(min_samples, 24):
        z = [rand_frac() for _ in range(m)]
        gamma = g.evaluate(z)
        if gamma == 0:
            continue
        u = rand_frac(nonzero=True)
        v = gamma ** 4 / u
        g3_pts.append((u, v, F0, F0, *z))
    g3 = StratumSpec(
        name="G3", ambient=ring,
        equations=(ring.variable(2), ring.variable(3),
                   ring.variable(0) * ring.variable(1) - gz ** 4),
        points=tuple(g3_pts),
        expected_dim=m + 1,
    )

    if g4_points is None:
        raise ValueError("g4_points required: exact samples on {g = 0}")
    g4_pts = [(F0, F0, F0, F0, *[Fraction(c) for c in zpt]) for zpt in g4_points]
    g4 = StratumSpec(
        name="G4", ambient=ring,
        equations=(ring.variable(0), ring.variable(1), ring.variable(2),
                   ring.variable(3), gz),
        points=tuple(g4_pts),
        expected_dim=m - 1,
    )

    # approach arcs into each G4 probe, inside G3:
    # (c*g(z0+t*eta)^2, g(z0+t*eta)^2/c, 0, 0, z0 + t*eta)
    tring = PolynomialRing(("t",), "rational")

    def g4_arc(zpt, eta, c=Fraction(2)):
        z0 = [Fraction(v) for v in zpt]
        images = [
            tring.constant(z0[i]) + tring.variable(0).scale(Fraction(eta[i]))
            for i in range(m)
        ]
        g_of_t = g.substitute(images)
        s = g_of_t * g_of_t
        u_poly = s.scale(c)
        v_poly = s.scale(1 / c)
        offsets = []
        base = [0.0, 0.0, 0.0, 0.0] + [float(v) for v in z0]
        for poly, base_val in ((u_poly, 0), (v_poly, 0)):
            terms = tuple(
                (complex(float(cf)), e[0]) for e, cf in poly.terms.items() if e[0] >= 1
            )
            offsets.append(terms)
        offsets.append(())  # x
        offsets.append(())  # y
        for i in range(m):
            offsets.append(((complex(float(eta[i])), 1),))
        return Arc(np.asarray(base, dtype=complex), tuple(offsets), real=True)

    g4_probe_z = g4_points[0]
    arcs = tuple(g4_arc(g4_probe_z, eta) for eta in ([1] * m, [1] + [-1] * (m - 1)))
    g3_arc_sampler = LocusSampler(g3, ambient_arcs=arcs)

    z_probe = g3_pts[0]
    strata = (
        FixtureStratum(
            g2, Expectation(2, "nondegenerate quadratic part: fiber {dx, dy}"),
            Expectation(m + 2, "free (u, v, z) off the discriminant"),
            Expectation("yes", f"2 + {m + 2} = {n}"),
            samplers=(LocusSampler(g2),),
        ),
        FixtureStratum(
            g3, Expectation(3, "rank-1 quadratic part: kernel arcs add "
                               "v du + u dv - 4 g^3 dg"),
            Expectation(m + 1, "hypersurface u*v = g^4 inside {x = y = 0}"),
            Expectation("yes", f"3 + {m + 1} = {n}"),
            samplers=(LocusSampler(g3),),
        ),
        FixtureStratum(
            g4, Expectation(4, "u, v and the quadratic part all vanish: limits span "
                               "{dx, dy, du, dv} only"),
            Expectation(m - 1, "the chosen hypersurface {g = 0}"),
            Expectation("no", f"4 + {m - 1} = {m + 3} != {n}"),
            samplers=(g3_arc_sampler, LocusSampler(g4)),
        ),
    )
    probes = (
        FixtureProbe(
            "G2_probe", (F1, Fraction(2), F0, F0, *[F1 + i for i in range(m)]),
            ((1, Expectation(2, "discriminant nonzero at the probe")),),
            samplers=(LocusSampler(g2),),
        ),
        FixtureProbe(
            "G3_probe", z_probe,
            ((1, Expectation(3, "rank-1 point with (u, v) nonzero")),),
            samplers=(LocusSampler(g3),),
        ),
        FixtureProbe(
            "G4_probe", g4_pts[0],
            ((1, Expectation(4, "see G4 stratum note")),
             (2, Expectation(4, "limits of rank-1 fibers along the supplied arcs "
                                "stay in {dx, dy, du, dv}"))),
            samplers=(g3_arc_sampler,),
        ),
    )
    return FixtureCase(
        name="hypersurface_g",
        description=f"hypersurface {{{g_text} = 0}} as a quasistratum",
        field_name="R", ring=ring, F=F,
        strata=strata, probes=probes,
        expected_rho=Expectation(1, "same mechanism as the squared-coefficient case"),
        expected_verdict=Expectation("no_universal",
                                     f"G4 has fiber dim 4 but codimension {n - (m - 1)}"),
        max_depth=2,
        min_samples=min_samples,
    )


def hypersurface_default() -> FixtureCase:
    """The registered instance: g = z1*z2 - 1 with exact hyperbola samples."""
    pts = [(F1, F1)]
    for k in range(1, 14):
        s = Fraction(k, 3)
        if s != 1:
            pts.append((s, 1 / s))
        pts.append((-s, -1 / s))
    return hypersurface_quasistratum("z1*z2 - 1", ("z1", "z2"), g4_points=pts)


# ---------------------------------------------------------------------------
# binary forms in an affine chart


def _binary_coefficients(q: int, roots: Sequence[Tuple[Fraction, int]],
                         ring: PolynomialRing) -> List[Fraction]:
    """Coefficients A_0..A_{q-1} of prod (X - c Y)^m in the chart A_q = 1."""
    two = PolynomialRing(("X", "Y"), "rational")
    X, Y = two.variable(0), two.variable(1)
    prod = two.one()
    for c, mult in roots:
        prod = prod * (X - Y.scale(c)) ** mult
    coeffs = [Fraction(0)] * (q + 1)
    for e, coeff in prod.terms.items():
        coeffs[e[0]] = Fraction(coeff)
    assert coeffs[q] == 1
    return coeffs[:q]


def binary_forms(q: int, multiplicities: Sequence[int]) -> FixtureCase:
    """Binary forms of degree q in the chart with leading coefficient 1.

    The depth-1 fiber at a form with root multiplicities (m_j) is spanned by
    dX, dY and one Veronese covector per repeated root (dim 2 + #{m_j >= 2});
    merging double roots along collision curves raises it to the stabilized
    value 2 + sum floor(m_j / 2)."""
    if not 3 <= q <= 5:
        raise ValueError("supported range: 3 <= q <= 5")
    mults = sorted((int(m) for m in multiplicities), reverse=True)
    if sum(mults) != q or any(m < 1 for m in mults):
        raise ValueError(f"multiplicities {multiplicities} do not partition {q}")
    names = [f"A{i}" for i in range(q)] + ["X", "Y"]
    ring = _ring(names, "C")
    f_text = "X^" + str(q) + " + " + " + ".join(
        f"A{i}*X^{i}*Y^{q - i}" if i > 0 else f"A0*Y^{q}" for i in range(q)
    )
    f = parse_polynomial(f_text, ring)
    F = PolynomialMap(ring, (f,))
    n = q + 2

    root_pool = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(3)]
    probe_roots = [(root_pool[j], m) for j, m in enumerate(mults)]
    probe_coeffs = _binary_coefficients(q, probe_roots, ring)
    probe_point = tuple(probe_coeffs) + (F0, F0)

    depth1 = 2 + sum(1 for m in mults if m >= 2)
    stabilized = 2 + sum(m // 2 for m in mults)

    def pattern_spec(k: int) -> StratumSpec:
        """Stratum of forms with exactly k double roots and q-2k simple ones."""
        dbl = [f"c{i}" for i in range(k)]
        sgl = [f"d{i}" for i in range(q - 2 * k)]
        pring = _ring(dbl + sgl if dbl + sgl else ["c0"], "C")
        two = PolynomialRing(tuple(dbl + sgl) if dbl + sgl else ("c0",), "rational")
        # build coefficient polynomials of prod (X - c_i Y)^2 prod (X - d_j Y)
        # by expanding over an auxiliary ring in the roots and X, Y
        aux = PolynomialRing(tuple(dbl + sgl + ["X", "Y"]) if dbl + sgl else ("c0", "X", "Y"),
                             "rational")
        Xv = aux.variable(aux.index_of("X"))
        Yv = aux.variable(aux.index_of("Y"))
        prod = aux.one()
        for name in dbl:
            rv = aux.variable(aux.index_of(name))
            prod = prod * (Xv - rv * Yv) ** 2
        for name in sgl:
            rv = aux.variable(aux.index_of(name))
            prod = prod * (Xv - rv * Yv)
        xi = aux.index_of("X")
        yi = aux.index_of("Y")
        coeff_polys = [pring.zero() for _ in range(q)]
        for e, c in prod.terms.items():
            i = e[xi]
            if i == q:
                continue
            root_exps = tuple(e[aux.index_of(nm)] for nm in dbl + sgl)
            mono = pring.monomial(root_exps, c) if dbl + sgl else pring.constant(c)
            coeff_polys[i] = coeff_polys[i] + mono
        images = tuple(coeff_polys) + (pring.zero(), pring.zero())
        rejections = []
        allnames = dbl + sgl
        for a in range(len(allnames)):
            for b in range(a + 1, len(allnames)):
                rejections.append(
                    pring.variable(a) - pring.variable(b)
                )
        reject_poly = None
        if rejections:
            total = pring.one()
            for r in rejections:
                total = total * r
            reject_poly = total
        return StratumSpec(
            name=f"pattern_k{k}", ambient=ring, param_ring=pring,
            parametrization=images,
            param_rejections=(reject_poly,) if reject_poly is not None else (),
            expected_dim=q - k,
        )

    strata = []
    for k in range(q // 2 + 1):
        spec = pattern_spec(k)
        strata.append(
            FixtureStratum(
                spec,
                Expectation(k + 2, f"{k} double roots: dX, dY plus one Veronese "
                                   f"covector per double root"),
                Expectation(q - k, f"{k} double + {q - 2 * k} simple roots"),
                Expectation("yes", f"{k + 2} + {q - k} = {n}"),
                classify_depth=1,
                samplers=(LocusSampler(spec),),
            )
        )

    # collision sampler: the split pattern (all floor(m/2) doubles + parity singles)
    split_doubles = sum(m // 2 for m in mults)
    split_spec = pattern_spec(split_doubles)
    split_pre = []
    for c, m in probe_roots:
        split_pre.extend([c] * (m // 2))
    for c, m in probe_roots:
        if m % 2:
            split_pre.append(c)
    collision = LocusSampler(split_spec, known_preimages=(tuple(split_pre),))

    probes = (
        FixtureProbe(
            "probe",
            probe_point,
            ((1, Expectation(depth1, "one Veronese covector per repeated root")),
             (2, Expectation(stabilized, "double roots merging along collision "
                                         "curves add root-derivative covectors")),
             (3, Expectation(stabilized, "no further growth"))),
            samplers=(collision,),
        ),
    )
    mult_tag = "_".join(str(m) for m in mults)
    rho_value = 2 if any(m >= 3 for m in mults) else 1
    rho_note = ("collision curves strictly enlarge the fiber at depth 2"
                if rho_value == 2 else
                "all probe fibers already stabilized at depth 1")
    return FixtureCase(
        name=f"binary_forms_q{q}_m{mult_tag}",
        description=f"degree-{q} binary forms, probe multiplicities {tuple(mults)}",
        field_name="C", ring=ring, F=F,
        strata=tuple(strata), probes=probes,
        expected_rho=Expectation(rho_value, rho_note),
        expected_verdict=Expectation("functorial_universal",
                                     "pattern strata satisfy (k+2) + (q-k) = q+2"),
        max_depth=3,
        caveats=(
            "the stabilized fiber value is reached at depth 2; depth-1 reports "
            "the per-point limit value",
        ),
    )


# ---------------------------------------------------------------------------
# isolated critical points


def isolated_critical_cases() -> List[FixtureCase]:
    cases = []

    ring_c = _ring(["x", "y"], "C")
    f_c = parse_polynomial("x^2 + y^3", ring_c)
    origin_c = _origin_spec("origin", ring_c)
    cases.append(
        FixtureCase(
            name="cusp_complex",
            description="isolated critical point over C: full fiber",
            field_name="C", ring=ring_c, F=PolynomialMap(ring_c, (f_c,)),
            strata=(
                FixtureStratum(
                    origin_c,
                    Expectation(2, "arcs along x ~ t^a, y ~ t^b realize both dx and dy"),
                    Expectation(0, "single point"),
                    Expectation("yes", "2 + 0 = 2"),
                    samplers=(LocusSampler(origin_c),),
                ),
            ),
            probes=(
                FixtureProbe(
                    "origin", (F0, F0),
                    ((1, Expectation(2, "both coordinate covectors arise as limits")),
                     (2, Expectation(2, "stable"))),
                    samplers=(LocusSampler(origin_c),),
                ),
            ),
            expected_rho=Expectation(1, "fiber is already everything at depth 1"),
            expected_verdict=Expectation("functorial_universal", "2 + 0 = 2"),
            max_depth=2,
        )
    )

    ring_r = _ring(["x", "y"], "R")
    f_r = parse_polynomial("x^3 + x*y^4", ring_r)
    origin_r = _origin_spec("origin", ring_r)
    cases.append(
        FixtureCase(
            name="real_quartic",
            description="real isolated critical point with a 1-dim fiber",
            field_name="R", ring=ring_r, F=PolynomialMap(ring_r, (f_r,)),
            strata=(
                FixtureStratum(
                    origin_r,
                    Expectation(1, "3x^2 + y^4 is a sum of even powers: no real "
                                   "cancellation, every limit is dx"),
                    Expectation(0, "single point"),
                    Expectation("no", "1 + 0 = 1 != 2"),
                    samplers=(LocusSampler(origin_r),),
                ),
            ),
            probes=(
                FixtureProbe(
                    "origin", (F0, F0),
                    ((1, Expectation(1, "see stratum note")),
                     (2, Expectation(1, "stable"))),
                    samplers=(LocusSampler(origin_r),),
                    expected_basis=((1.0, 0.0),),
                    basis_note="the only real limit direction is dx",
                ),
            ),
            expected_rho=Expectation(1, "constant fiber"),
            expected_verdict=Expectation(
                "no_universal", "formal verdict: the complement condition fails"
            ),
            max_depth=2,
            caveats=(
                "over R the bundle is lower-dimensional than the ambient space; "
                "the universality criterion's standing hypothesis fails, so the "
                "verdict is formal",
            ),
        )
    )

    ring_c2 = _ring(["x", "y"], "C")
    f_c2 = parse_polynomial("x^3 + x*y^4", ring_c2)
    origin_c2 = _origin_spec("origin", ring_c2)
    cases.append(
        FixtureCase(
            name="quartic_complex",
            description="same map over C: complex cancellation restores dy",
            field_name="C", ring=ring_c2, F=PolynomialMap(ring_c2, (f_c2,)),
            strata=(
                FixtureStratum(
                    origin_c2,
                    Expectation(2, "weighted arcs with 3x^2 + y^4 = 0 (x ~ +-i y^2 / sqrt 3) "
                                   "realize a dy limit"),
                    Expectation(0, "single point"),
                    Expectation("yes", "2 + 0 = 2"),
                    samplers=(LocusSampler(origin_c2),),
                ),
            ),
            probes=(
                FixtureProbe(
                    "origin", (F0, F0),
                    ((1, Expectation(2, "see stratum note")),
                     (2, Expectation(2, "stable"))),
                    samplers=(LocusSampler(origin_c2),),
                ),
            ),
            expected_rho=Expectation(1, "constant fiber"),
            expected_verdict=Expectation("functorial_universal", "2 + 0 = 2"),
            max_depth=2,
        )
    )
    return cases


# ---------------------------------------------------------------------------
# registry and replay


def registry() -> Dict[str, Callable[[], FixtureCase]]:
    reg: Dict[str, Callable[[], FixtureCase]] = {
        "quad_forms_n2": lambda: quad_forms_family(2),
        "quad_forms_n3": lambda: quad_forms_family(3),
        "recursive_n1": lambda: recursive_family(1),
        "recursive_n2": lambda: recursive_family(2),
        "w_squared_example": w_squared_example,
        "hypersurface_g": hypersurface_default,
        "binary_forms_q4_m4": lambda: binary_forms(4, (4,)),
        "binary_forms_q4_m2_2": lambda: binary_forms(4, (2, 2)),
        "binary_forms_q4_m1_1_1_1": lambda: binary_forms(4, (1, 1, 1, 1)),
        "binary_forms_q3_m1_1_1": lambda: binary_forms(3, (1, 1, 1)),
    }
    for case in isolated_critical_cases():
        reg[case.name] = (lambda c=case: c)
    return reg


def load_fixture(name: str) -> FixtureCase:
    reg = registry()
    if name not in reg:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(reg))}")
    return reg[name]()


def replay(case: FixtureCase, seed: Optional[int] = None,
           budgets: Optional[Budgets] = None,
           skip_strata: bool = False) -> Dict:
    """Run a fixture through the numeric pipeline; returns a check report."""
    cfg = RunConfig(
        field_name=case.field_name,
        seed=case.default_seed if seed is None else seed,
        budgets=budgets if budgets is not None else Budgets(),
    )
    engine = GlaeserEngine(case.F, cfg)
    checks: List[Dict] = []
    t_start = time.perf_counter()

    probe_rows = []
    stab_probes = []
    for probe in case.probes:
        samplers = list(probe.samplers)
        row: Dict = {"name": probe.name, "dims": {}}
        for depth, expected in probe.expected_dims:
            est = engine.fiber(list(probe.point), depth, samplers)
            row["dims"][depth] = est.dimension
            checks.append({
                "check": f"probe {probe.name} depth {depth} dim",
                "expected": expected.value,
                "actual": est.dimension,
                "note": expected.note,
                "pass": est.dimension == expected.value,
            })
            if depth == 1 and probe.expected_basis is not None:
                basis = est.basis.rows
                ok = basis.shape[0] == len(probe.expected_basis) and all(
                    min(projective_distance(row_e, b) for b in basis) < 1e-6
                    for row_e in np.asarray(probe.expected_basis, dtype=complex)
                )
                checks.append({
                    "check": f"probe {probe.name} basis",
                    "expected": "projective match",
                    "actual": "match" if ok else "mismatch",
                    "note": probe.basis_note,
                    "pass": ok,
                })
        probe_rows.append(row)
        stab_probes.append((list(probe.point), samplers))

    stab = engine.stabilization_index(stab_probes, max_depth=case.max_depth)
    if case.expected_rho is not None:
        checks.append({
            "check": "stabilization index",
            "expected": case.expected_rho.value,
            "actual": stab.rho_hat,
            "note": case.expected_rho.note,
            "pass": stab.rho_hat == case.expected_rho.value,
        })

    reports = []
    strata_rows = []
    if not skip_strata:
        for fs in case.strata:
            classified = classify_quasistratum(
                engine, fs.spec, fs.classify_depth, fs.samplers,
                min_samples=case.min_samples,
            )
            report = lagrangian_check(
                engine, fs.spec, fs.classify_depth, fs.samplers,
                min_samples=case.min_samples, classified=classified,
            )
            strata_rows.append({
                "name": fs.spec.name,
                "fiber_dim": report.fiber_dim,
                "stratum_dim": report.stratum_dim,
                "lagrangian": report.lagrangian,
                "residual": report.residual,
            })
            for label, expected, actual in (
                ("fiber dim", fs.expected_fiber_dim, report.fiber_dim),
                ("stratum dim", fs.expected_dim, report.stratum_dim),
                ("lagrangian", fs.expected_lagrangian, report.lagrangian),
            ):
                checks.append({
                    "check": f"stratum {fs.spec.name} {label}",
                    "expected": expected.value,
                    "actual": actual,
                    "note": expected.note,
                    "pass": actual == expected.value,
                })
            if fs.in_verdict:
                reports.append(report)

        if case.expected_verdict is not None and reports:
            verdict = universality_verdict(
                reports, stab.rho_hat, stab.stabilized, l=case.F.l
            )
            checks.append({
                "check": "verdict",
                "expected": case.expected_verdict.value,
                "actual": verdict.verdict,
                "note": case.expected_verdict.note,
                "pass": verdict.verdict == case.expected_verdict.value,
            })
        else:
            verdict = None
    else:
        verdict = None

    return {
        "fixture": case.name,
        "description": case.description,
        "field": case.field_name,
        "seed": cfg.seed,
        "probes": probe_rows,
        "dim_table": stab.dim_table(),
        "rho_hat": stab.rho_hat,
        "stabilized": stab.stabilized,
        "strata": strata_rows,
        "verdict": verdict.verdict if verdict is not None else None,
        "justification": verdict.justification if verdict is not None else None,
        "caveats": list(case.caveats),
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
        "elapsed_seconds": time.perf_counter() - t_start,
    }
