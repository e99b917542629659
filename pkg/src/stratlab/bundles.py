"""Constructible covector bundles and the exact close-then-span iteration.

A bundle over K^n is stored as a constructible set in 2n variables
(x_1..x_n, xi_1..xi_n): a finite union of pairs {equations = 0, inequation != 0}.
The iteration step takes the Zariski closure of each pair (ideal saturation by
the inequation) and then replaces fibers by their linear spans via repeated
fiberwise Minkowski doubling, which is valid because fibers are cones.

The symbolic pipeline is supported for base arity n <= 3; larger instances
belong to the numeric estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .groebner import (
    BudgetExceededError,
    DEFAULT_BUDGETS,
    GroebnerBasis,
    GroebnerBudgets,
    Ideal,
    buchberger,
    eliminate,
    ideals_equal,
    normal_form,
    saturate,
)
from .poly import Polynomial, PolynomialMap, PolynomialRing, PolyMatrix, jacobian, minors
from .scalars import exact_zero

SYMBOLIC_ARITY_LIMIT = 3


class FiberwiseLinearityError(ValueError):
    """The bundle's fibers are not linear subspaces where they must be."""


class ConeInvariantError(ValueError):
    """A bundle fiber failed the scaling-invariance (cone) check."""


@dataclass(frozen=True)
class ConstructiblePair:
    equations: Ideal
    inequation: Polynomial

    def __post_init__(self):
        if self.inequation.is_zero():
            raise ValueError("inequation must be a nonzero polynomial")


@dataclass(frozen=True)
class ConstructibleSet:
    """Union over pairs of {equations = 0, inequation != 0}."""

    pairs: Tuple[ConstructiblePair, ...]

    def is_empty(self) -> bool:
        return not self.pairs


@dataclass(frozen=True)
class ConstructibleBundle:
    base_ring: PolynomialRing
    total_ring: PolynomialRing
    cset: ConstructibleSet
    index: int = 0

    @property
    def n(self) -> int:
        return self.base_ring.arity

    def xi_indices(self) -> range:
        return range(self.n, 2 * self.n)


def _remap(p: Polynomial, target: PolynomialRing, index_map: Sequence[int]) -> Polynomial:
    """Reindex variables of ``p`` into ``target`` along ``index_map``."""
    terms = {}
    for e, c in p.terms.items():
        e2 = [0] * target.arity
        for i, k in enumerate(e):
            if k:
                e2[index_map[i]] = k
        terms[tuple(e2)] = target.coerce(c)
    return Polynomial(target, terms)


def total_ring_for(base: PolynomialRing) -> PolynomialRing:
    prefix = "xi"
    while any(v.startswith(prefix) for v in base.variables):
        prefix = "_" + prefix
    xi_names = tuple(f"{prefix}{i + 1}" for i in range(base.arity))
    return PolynomialRing(base.variables + xi_names, base.coefficient_field)


def sing_locus_ideal(F: PolynomialMap) -> Ideal:
    """Ideal of critical points of F inside F^{-1}(0)."""
    jac = jacobian(F)
    size = min(F.l, F.n)
    gens = list(F.components) + minors(jac, size)
    return Ideal(F.ring, tuple(gens))


def initial_bundle(F: PolynomialMap) -> ConstructibleBundle:
    """Graph of the row span of the Jacobian over noncritical points.

    Each pair demands rank [Jac(F); xi] <= l via the (l+1)-minors, with one
    nonzero l-minor of Jac(F) as the inequation; the union over minors covers
    exactly the noncritical locus.
    """
    base = F.ring
    total = total_ring_for(base)
    n, l = F.n, F.l
    base_to_total = list(range(n))

    jac = jacobian(F)
    stacked_rows = [
        [_remap(entry, total, base_to_total) for entry in row] for row in jac.rows
    ]
    stacked_rows.append([total.variable(n + j) for j in range(n)])
    stacked = PolyMatrix(total, stacked_rows)

    rank_eqs = minors(stacked, l + 1) if l + 1 <= n else []
    rank_eqs = [g for g in rank_eqs if not g.is_zero()]
    equations = Ideal(total, tuple(rank_eqs))

    pairs = []
    for m in minors(jac, min(l, n)):
        if m.is_zero():
            continue
        pairs.append(ConstructiblePair(equations, _remap(m, total, base_to_total)))
    return ConstructibleBundle(base, total, ConstructibleSet(tuple(pairs)), index=0)


# ---------------------------------------------------------------------------
# the close-then-span step


def _dedupe_pairs(pairs: Sequence[ConstructiblePair],
                  budgets: GroebnerBudgets) -> List[Tuple[ConstructiblePair, GroebnerBasis]]:
    kept: List[Tuple[ConstructiblePair, GroebnerBasis]] = []
    for pair in pairs:
        gb = buchberger(pair.equations, budgets=budgets)
        if any(g.is_constant() for g in gb.basis):
            continue  # empty component
        duplicate = False
        for other_pair, other_gb in kept:
            if pair.inequation == other_pair.inequation and ideals_equal(gb, other_gb):
                duplicate = True
                break
        if not duplicate:
            kept.append((pair, gb))
    return kept


def check_scaling_invariance(bundle: ConstructibleBundle,
                             budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> None:
    """Verify each pair's fiber is invariant under xi -> c*xi (cone check)."""
    total = bundle.total_ring
    cname = "_c"
    while cname in total.variables:
        cname = "_" + cname
    big = PolynomialRing(total.variables + (cname,), total.coefficient_field)
    c = big.variable(big.arity - 1)
    identity_map = list(range(total.arity))
    images = [big.variable(i) for i in range(big.arity)]
    for i in bundle.xi_indices():
        images[i] = images[i] * c
    for pair in bundle.cset.pairs:
        gens_big = [_remap(g, big, identity_map) for g in pair.equations.generators]
        gb = buchberger(Ideal(big, tuple(gens_big)), budgets=budgets)
        for g in pair.equations.generators:
            scaled = _remap(g, big, identity_map).substitute(images)
            if not normal_form(scaled, gb.basis, gb.order, budgets).is_zero():
                raise ConeInvariantError(
                    f"fiber not scaling-invariant: witness {g.to_text()}"
                )


def _minkowski_double(left: Ideal, right: Ideal, bundle: ConstructibleBundle,
                      budgets: GroebnerBudgets) -> Ideal:
    """Eliminate xi', xi'' from {(x,xi') in L, (x,xi'') in R, xi = xi' + xi''}."""
    total = bundle.total_ring
    n = bundle.n
    names = list(total.variables)
    suffix_a = [f"_a{i}" for i in range(n)]
    suffix_b = [f"_b{i}" for i in range(n)]
    big = PolynomialRing(tuple(names + suffix_a + suffix_b), total.coefficient_field)

    to_a = list(range(n)) + list(range(2 * n, 3 * n))
    to_b = list(range(n)) + list(range(3 * n, 4 * n))
    gens: List[Polynomial] = []
    for g in left.generators:
        gens.append(_remap(g, big, to_a))
    for g in right.generators:
        gens.append(_remap(g, big, to_b))
    for i in range(n):
        gens.append(big.variable(n + i) - big.variable(2 * n + i) - big.variable(3 * n + i))
    eliminated = eliminate(Ideal(big, tuple(gens)), suffix_a + suffix_b, budgets)
    identity_map = list(range(total.arity))
    return Ideal(total, tuple(_remap(g, total, identity_map) for g in eliminated.generators))


def glaeser_step(bundle: ConstructibleBundle,
                 budgets: GroebnerBudgets = DEFAULT_BUDGETS,
                 validate_cone: bool = True) -> ConstructibleBundle:
    """One close-then-span iteration on a constructible bundle.

    First each pair is closed (saturate its equations by its inequation and
    drop the inequation), then ceil(log2 n) rounds of fiberwise Minkowski
    doubling replace every fiber by its linear span.
    """
    if bundle.n > SYMBOLIC_ARITY_LIMIT:
        raise ValueError(
            f"symbolic pipeline supports base arity <= {SYMBOLIC_ARITY_LIMIT}, got {bundle.n}"
        )
    if validate_cone:
        check_scaling_invariance(bundle, budgets)

    total = bundle.total_ring
    closed = []
    for pair in bundle.cset.pairs:
        sat = saturate(pair.equations, pair.inequation, budgets)
        closed.append(ConstructiblePair(sat, total.one()))
    current = [gb_pair for gb_pair in _dedupe_pairs(closed, budgets)]

    rounds = max(1, math.ceil(math.log2(bundle.n))) if bundle.n > 1 else 1
    for _ in range(rounds):
        summed: List[ConstructiblePair] = []
        ideals = [pair.equations for pair, _ in current]
        for i in range(len(ideals)):
            for j in range(i, len(ideals)):
                doubled = _minkowski_double(ideals[i], ideals[j], bundle, budgets)
                summed.append(ConstructiblePair(doubled, total.one()))
        current = _dedupe_pairs(summed, budgets)

    new_set = ConstructibleSet(tuple(pair for pair, _ in current))
    return ConstructibleBundle(bundle.base_ring, total, new_set, bundle.index + 1)


def bundles_equal(a: ConstructibleBundle, b: ConstructibleBundle,
                  budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> bool:
    """Pairwise ideal equality after dedupe (sufficient for closed bundles)."""
    pa = _dedupe_pairs(a.cset.pairs, budgets)
    pb = _dedupe_pairs(b.cset.pairs, budgets)
    if len(pa) != len(pb):
        return False
    used = set()
    for pair_a, gb_a in pa:
        found = False
        for k, (pair_b, gb_b) in enumerate(pb):
            if k in used:
                continue
            if pair_a.inequation == pair_b.inequation and ideals_equal(gb_a, gb_b):
                used.add(k)
                found = True
                break
        if not found:
            return False
    return True


def iterate_to_stabilization(bundle: ConstructibleBundle,
                             max_steps: Optional[int] = None,
                             budgets: GroebnerBudgets = DEFAULT_BUDGETS,
                             validate_cone: bool = True):
    """Iterate the step until a fixed point; returns (bundle, rho).

    rho is the first index p with step(T^(p)) = T^(p)."""
    limit = max_steps if max_steps is not None else 2 * bundle.n
    current = bundle
    for _ in range(limit + 1):
        stepped = glaeser_step(current, budgets, validate_cone)
        if bundles_equal(current, stepped, budgets):
            return current, current.index
        current = stepped
    raise BudgetExceededError(f"no stabilization within {limit} steps")


# ---------------------------------------------------------------------------
# fiber extraction from a closed fiberwise-linear bundle


def _linear_matrix(pair_gb: GroebnerBasis, bundle: ConstructibleBundle):
    """Split GB generators into (base-only ideals, xi-linear cutting rows).

    Returns (base_gens, rows) where rows[k] is a vector of n base-ring
    polynomials c_i(x) representing the cutting form sum_i c_i(x) * xi_i.
    Raises FiberwiseLinearityError on generators of higher xi-degree or with
    xi-free tails.
    """
    n = bundle.n
    base = bundle.base_ring
    base_gens: List[Polynomial] = []
    rows: List[List[Polynomial]] = []
    for g in pair_gb.basis:
        xi_degree = max((sum(e[n:]) for e in g.terms), default=0)
        if xi_degree == 0:
            base_gens.append(g.restrict_ring(base))
            continue
        if xi_degree > 1:
            raise FiberwiseLinearityError(
                f"generator of xi-degree {xi_degree}: {g.to_text()}"
            )
        row = [base.zero() for _ in range(n)]
        for e, c in g.terms.items():
            xi_part = e[n:]
            total_xi = sum(xi_part)
            if total_xi == 0:
                raise FiberwiseLinearityError(
                    f"mixed generator with xi-free term: {g.to_text()}"
                )
            i = xi_part.index(1)
            mono = base.monomial(e[:n], c)
            row[i] = row[i] + mono
        rows.append(row)
    return base_gens, rows


def _exact_rank(matrix: List[List[object]]) -> int:
    """Rank of a matrix of exact scalars by fraction-free style elimination."""
    rows = [list(r) for r in matrix]
    rank = 0
    col = 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][col]:
                pivot = r
                break
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for r in range(rank + 1, len(rows)):
            if rows[r][col]:
                factor = rows[r][col] / pv
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def fiber_dimension_at(bundle: ConstructibleBundle, point: Sequence,
                       budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> int:
    """Exact fiber dimension of a closed fiberwise-linear bundle at a point."""
    best: Optional[int] = None
    base = bundle.base_ring
    exact_point = [base.coerce(v) for v in point]
    for pair in bundle.cset.pairs:
        gb = buchberger(pair.equations, budgets=budgets)
        base_gens, rows = _linear_matrix(gb, bundle)
        if any(g.evaluate(exact_point) for g in base_gens):
            continue  # point not over this component
        if pair.inequation != bundle.total_ring.one():
            ineq = pair.inequation.restrict_ring(base)
            if not ineq.evaluate(exact_point):
                continue
        matrix = [[entry.evaluate(exact_point) for entry in row] for row in rows]
        matrix = [row for row in matrix if any(row)]
        rank = _exact_rank(matrix) if matrix else 0
        dim = bundle.n - rank
        best = dim if best is None else max(best, dim)
    if best is None:
        raise ValueError("point lies over no component of the bundle")
    return best


def quasistrata(bundle: ConstructibleBundle, restriction: Ideal, r: int,
                budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> ConstructibleSet:
    """Locus inside V(restriction) where the fiber has dimension exactly r.

    The bundle must be closed and fiberwise linear: its fibers are kernels of
    the xi-linear cutting matrix L(x), so {dim = r} is {rank L = n-r}, i.e.
    all (n-r+1)-minors vanish while some (n-r)-minor does not.
    """
    n = bundle.n
    base = bundle.base_ring
    if r < 0 or r > n:
        return ConstructibleSet(())
    target_rank = n - r
    out_pairs: List[ConstructiblePair] = []
    for pair in bundle.cset.pairs:
        gb = buchberger(pair.equations, budgets=budgets)
        base_gens, rows = _linear_matrix(gb, bundle)
        if len(rows) < target_rank:
            continue
        L = PolyMatrix(base, rows) if rows else None
        vanish = list(restriction.generators) + base_gens
        if L is not None and target_rank + 1 <= min(len(rows), n):
            vanish += [m for m in minors(L, target_rank + 1) if not m.is_zero()]
        if target_rank == 0:
            out_pairs.append(ConstructiblePair(Ideal(base, tuple(vanish)), base.one()))
            continue
        witness = [m for m in minors(L, target_rank) if not m.is_zero()]
        for w in witness:
            out_pairs.append(ConstructiblePair(Ideal(base, tuple(vanish)), w))
    return ConstructibleSet(tuple(out_pairs))


def pair_is_empty(pair: ConstructiblePair,
                  budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> bool:
    """True iff {equations = 0, inequation != 0} has no points.

    The locus is empty exactly when the saturation I : g^infinity is the unit
    ideal (the closure of V(I) minus V(g) is empty)."""
    sat = saturate(pair.equations, pair.inequation, budgets)
    gb = buchberger(sat, budgets=budgets)
    return any(g.is_constant() for g in gb.basis)


def constructible_is_empty(cset: ConstructibleSet,
                           budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> bool:
    return all(pair_is_empty(pair, budgets) for pair in cset.pairs)
