"""Exact Groebner-basis machinery: Buchberger, elimination, saturation, dimension.

Everything here is sized for tiny instances (total ring arity <= ~12,
degrees <= ~8).  Blow-up is the expected failure mode, so all loops run under
explicit resource budgets and raise :class:`BudgetExceededError` rather than
truncating silently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import Exponents, Polynomial, PolynomialRing, grevlex_key


class BudgetExceededError(RuntimeError):
    """A Groebner computation hit its configured resource budget."""


class EmptyVarietyError(ValueError):
    """Dimension was requested for the unit ideal."""


@dataclass(frozen=True)
class GroebnerBudgets:
    max_degree: int = 60
    max_basis: int = 400
    max_reductions: int = 200_000

    def check_degree(self, p: Polynomial, context: str):
        if p.total_degree() > self.max_degree:
            raise BudgetExceededError(
                f"{context}: degree {p.total_degree()} exceeds budget {self.max_degree}"
            )


DEFAULT_BUDGETS = GroebnerBudgets()


# ---------------------------------------------------------------------------
# term orders


class TermOrder:
    tag = "abstract"

    def key(self, exps: Exponents):
        raise NotImplementedError


class Grevlex(TermOrder):
    tag = "grevlex"

    def key(self, exps: Exponents):
        return grevlex_key(exps)

    def __repr__(self):
        return "Grevlex()"


class BlockElimination(TermOrder):
    """Block order with the dropped variables dominating; grevlex in each block."""

    tag = "elimination"

    def __init__(self, drop_indices: Sequence[int], arity: int):
        self.drop = tuple(sorted(drop_indices))
        self.keep = tuple(i for i in range(arity) if i not in set(self.drop))
        if not self.drop:
            raise ValueError("elimination order needs a nonempty drop block")
        if not self.keep:
            raise ValueError("cannot drop every variable")

    def key(self, exps: Exponents):
        drop_part = tuple(exps[i] for i in self.drop)
        keep_part = tuple(exps[i] for i in self.keep)
        return (grevlex_key(drop_part), grevlex_key(keep_part))

    def __repr__(self):
        return f"BlockElimination(drop={self.drop})"


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class Ideal:
    ring: PolynomialRing
    generators: Tuple[Polynomial, ...]

    def __post_init__(self):
        gens = tuple(g for g in self.generators if not g.is_zero())
        for g in gens:
            if g.ring != self.ring:
                raise ValueError("ideal generators must share the ring")
        object.__setattr__(self, "generators", gens)

    def is_zero(self) -> bool:
        return not self.generators


def _leading(p: Polynomial, order: TermOrder) -> Tuple[Exponents, object]:
    return max(p.terms.items(), key=lambda t: order.key(t[0]))


def _divides(a: Exponents, b: Exponents) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _exp_sub(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x - y for x, y in zip(a, b))


def _exp_lcm(a: Exponents, b: Exponents) -> Exponents:
    return tuple(max(x, y) for x, y in zip(a, b))


def normal_form(p: Polynomial, basis: Sequence[Polynomial], order: TermOrder,
                budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> Polynomial:
    """Remainder of multivariate division of ``p`` by ``basis``."""
    if not basis:
        return p
    ring = p.ring
    leads = [_leading(g, order) for g in basis]
    remainder = ring.zero()
    work = p
    steps = 0
    while not work.is_zero():
        steps += 1
        if steps > budgets.max_reductions:
            raise BudgetExceededError("normal form exceeded reduction budget")
        lt_exp, lt_coeff = _leading(work, order)
        reduced = False
        for g, (g_exp, g_coeff) in zip(basis, leads):
            if _divides(g_exp, lt_exp):
                factor = ring.monomial(_exp_sub(lt_exp, g_exp), lt_coeff / g_coeff)
                work = work - factor * g
                reduced = True
                break
        if not reduced:
            mono = ring.monomial(lt_exp, lt_coeff)
            remainder = remainder + mono
            work = work - mono
    return remainder


def _s_polynomial(f: Polynomial, g: Polynomial, order: TermOrder) -> Polynomial:
    ring = f.ring
    (fe, fc), (ge, gc) = _leading(f, order), _leading(g, order)
    lcm = _exp_lcm(fe, ge)
    mf = ring.monomial(_exp_sub(lcm, fe), ring.coerce(1) / fc)
    mg = ring.monomial(_exp_sub(lcm, ge), ring.coerce(1) / gc)
    return mf * f - mg * g


@dataclass(frozen=True)
class GroebnerBasis:
    ideal: Ideal
    order: TermOrder
    basis: Tuple[Polynomial, ...]

    def reduce(self, p: Polynomial) -> Polynomial:
        return normal_form(p, self.basis, self.order)

    def contains(self, p: Polynomial) -> bool:
        return self.reduce(p).is_zero()

    def leading_exponents(self) -> List[Exponents]:
        return [_leading(g, self.order)[0] for g in self.basis]


def buchberger(ideal: Ideal, order: Optional[TermOrder] = None,
               budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> GroebnerBasis:
    """Reduced Groebner basis of ``ideal`` under ``order`` (grevlex default)."""
    order = order or Grevlex()
    basis: List[Polynomial] = []
    for g in ideal.generators:
        budgets.check_degree(g, "input generator")
        basis.append(g)
    if not basis:
        return GroebnerBasis(ideal, order, ())

    pairs = {(i, j) for i in range(len(basis)) for j in range(i)}
    reductions = 0
    while pairs:
        # normal selection: smallest lcm of leading monomials first
        i, j = min(
            pairs,
            key=lambda ij: order.key(
                _exp_lcm(_leading(basis[ij[0]], order)[0], _leading(basis[ij[1]], order)[0])
            ),
        )
        pairs.discard((i, j))
        fe = _leading(basis[i], order)[0]
        ge = _leading(basis[j], order)[0]
        lcm = _exp_lcm(fe, ge)
        if lcm == tuple(a + b for a, b in zip(fe, ge)):
            continue  # coprime leading terms reduce to zero
        reductions += 1
        if reductions > budgets.max_reductions:
            raise BudgetExceededError("Buchberger exceeded pair-reduction budget")
        s = _s_polynomial(basis[i], basis[j], order)
        h = normal_form(s, basis, order, budgets)
        if h.is_zero():
            continue
        budgets.check_degree(h, "new basis element")
        basis.append(h)
        if len(basis) > budgets.max_basis:
            raise BudgetExceededError(
                f"Buchberger basis grew past budget {budgets.max_basis}"
            )
        new_index = len(basis) - 1
        pairs.update((new_index, k) for k in range(new_index))

    reduced = _reduce_basis(basis, order, budgets)
    return GroebnerBasis(ideal, order, tuple(reduced))


def _reduce_basis(basis: List[Polynomial], order: TermOrder,
                  budgets: GroebnerBudgets) -> List[Polynomial]:
    # minimalize: drop elements whose leading term is divisible by another's
    keep: List[Polynomial] = []
    leads = [_leading(g, order)[0] for g in basis]
    for idx, g in enumerate(basis):
        if any(
            k != idx and _divides(leads[k], leads[idx])
            and not (leads[k] == leads[idx] and k > idx)
            for k in range(len(basis))
        ):
            continue
        keep.append(g)
    # tail-reduce and normalize to monic
    result: List[Polynomial] = []
    for idx, g in enumerate(keep):
        others = keep[:idx] + keep[idx + 1 :]
        h = normal_form(g, others, order, budgets) if others else g
        if h.is_zero():
            continue
        _, lc = _leading(h, order)
        result.append(h.scale(h.ring.coerce(1) / lc))
    result.sort(key=lambda p: order.key(_leading(p, order)[0]))
    return result


def ideals_equal(a: GroebnerBasis, b: GroebnerBasis) -> bool:
    """Ideal equality via mutual reduction of generators to zero."""
    return all(b.contains(g) for g in a.basis) and all(a.contains(g) for g in b.basis)


# ---------------------------------------------------------------------------
# elimination / saturation / dimension


def eliminate(ideal: Ideal, drop_names: Sequence[str],
              budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> Ideal:
    """Intersection with the subring omitting ``drop_names`` (block order)."""
    ring = ideal.ring
    drop = [ring.index_of(name) for name in drop_names]
    if not drop:
        return ideal
    if len(drop) >= ring.arity:
        raise ValueError("cannot eliminate every variable")
    order = BlockElimination(drop, ring.arity)
    gb = buchberger(ideal, order, budgets)
    keep_names = tuple(v for i, v in enumerate(ring.variables) if i not in set(drop))
    subring = PolynomialRing(keep_names, ring.coefficient_field)
    drop_set = set(drop)
    survivors = [
        g.restrict_ring(subring)
        for g in gb.basis
        if all(all(e[i] == 0 for i in drop_set) for e in g.terms)
    ]
    return Ideal(subring, tuple(survivors))


def _fresh_name(ring: PolynomialRing, stem: str) -> str:
    name = stem
    k = 0
    while name in ring.variables:
        k += 1
        name = f"{stem}{k}"
    return name


def saturate(ideal: Ideal, g: Polynomial,
             budgets: GroebnerBudgets = DEFAULT_BUDGETS) -> Ideal:
    """I : g^infinity, via eliminating z from I + <1 - z*g>."""
    if g.is_zero():
        raise ValueError("cannot saturate by the zero polynomial")
    ring = ideal.ring
    if g.is_constant():
        return ideal
    zname = _fresh_name(ring, "_z")
    big = PolynomialRing(ring.variables + (zname,), ring.coefficient_field)
    z = big.variable(big.arity - 1)
    lifted = [p.rename_ring(big) for p in ideal.generators]
    lifted.append(big.one() - z * g.rename_ring(big))
    eliminated = eliminate(Ideal(big, tuple(lifted)), [zname], budgets)
    return Ideal(ring, tuple(p.rename_ring(ring) for p in eliminated.generators))


def ideal_dimension(gb: GroebnerBasis) -> int:
    """Krull dimension from the staircase of leading terms.

    Dimension equals the largest cardinality of a variable subset S such that
    no leading monomial is supported entirely inside S.
    """
    ring = gb.ideal.ring
    n = ring.arity
    if not gb.basis:
        return n
    supports = []
    for exps in gb.leading_exponents():
        support = frozenset(i for i, e in enumerate(exps) if e > 0)
        if not support:
            raise EmptyVarietyError("unit ideal has an empty variety")
        supports.append(support)
    best = 0
    for size in range(n, 0, -1):
        for subset in itertools.combinations(range(n), size):
            sset = set(subset)
            if all(not support <= sset for support in supports):
                return size
    return best
