"""Exact multivariate polynomial arithmetic over Q and Q(i).

Polynomials carry a reference to their ring (ordered variable names plus a
coefficient-field flag) and store a map from dense exponent vectors to nonzero
exact coefficients.  Values are immutable after construction and safe to share
across threads.

Term order is graded reverse lexicographic by default; elimination block
orders live in :mod:`stratlab.groebner`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .scalars import (
    GaussianRational,
    coerce_scalar,
    exact_one,
    exact_zero,
    scalar_is_exact,
    scalar_to_complex,
)

Exponents = Tuple[int, ...]

RATIONAL = "rational"
GAUSSIAN = "gaussian_rational"


@dataclass(frozen=True)
class PolynomialRing:
    """Ambient ring K[x_1,...,x_n] with a fixed variable order."""

    variables: Tuple[str, ...]
    coefficient_field: str = RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise ValueError("ring needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be unique")
        if self.coefficient_field not in (RATIONAL, GAUSSIAN):
            raise ValueError(f"unknown coefficient field {self.coefficient_field!r}")

    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def gaussian(self) -> bool:
        return self.coefficient_field == GAUSSIAN

    def index_of(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def coerce(self, value):
        return coerce_scalar(value, self.gaussian)

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.constant(1)

    def constant(self, value) -> "Polynomial":
        c = self.coerce(value)
        if not c:
            return self.zero()
        return Polynomial(self, {(0,) * self.arity: c})

    def variable(self, index: int) -> "Polynomial":
        exps = [0] * self.arity
        exps[index] = 1
        return Polynomial(self, {tuple(exps): self.coerce(1)})

    def monomial(self, exps: Sequence[int], coeff=1) -> "Polynomial":
        c = self.coerce(coeff)
        if not c:
            return self.zero()
        exps = tuple(int(e) for e in exps)
        if len(exps) != self.arity or any(e < 0 for e in exps):
            raise ValueError("bad exponent vector")
        return Polynomial(self, {exps: c})


def grevlex_key(exps: Exponents):
    """Sort key realizing graded reverse lexicographic order (ascending)."""
    return (sum(exps), tuple(-e for e in reversed(exps)))


class Polynomial:
    """Immutable multivariate polynomial with exact coefficients."""

    __slots__ = ("ring", "_terms", "_numeric", "_intdata")

    def __init__(self, ring: PolynomialRing, terms: Dict[Exponents, object]):
        self.ring = ring
        self._terms = {e: c for e, c in terms.items() if c}
        self._numeric = None
        self._intdata = None

    # -- introspection -----------------------------------------------------

    @property
    def terms(self) -> Dict[Exponents, object]:
        return dict(self._terms)

    def items_sorted(self) -> List[Tuple[Exponents, object]]:
        return sorted(self._terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def total_degree(self) -> int:
        """Degree of the zero polynomial is -1 by convention."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, index: int) -> int:
        if not self._terms:
            return -1
        return max(e[index] for e in self._terms)

    def constant_value(self):
        zero_exp = (0,) * self.ring.arity
        return self._terms.get(zero_exp, exact_zero(self.ring.gaussian))

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.ring == other.ring
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.ring, frozenset(self._terms.items())))

    def __repr__(self):
        return f"Polynomial({self.to_text()!r})"

    # -- arithmetic --------------------------------------------------------

    def _check_ring(self, other: "Polynomial"):
        if self.ring != other.ring:
            raise ValueError("polynomials from different rings")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = self.ring.constant(other)
        self._check_ring(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            acc = terms.get(e)
            s = c if acc is None else acc + c
            if s:
                terms[e] = s
            elif acc is not None:
                del terms[e]
        return Polynomial(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = self.ring.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + self.ring.constant(other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check_ring(other)
        terms: Dict[Exponents, object] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                acc = terms.get(e)
                s = prod if acc is None else acc + prod
                if s:
                    terms[e] = s
                elif acc is not None:
                    del terms[e]
        return Polynomial(self.ring, terms)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, value):
        c = self.ring.coerce(value)
        if not c:
            return self.ring.zero()
        return Polynomial(self.ring, {e: c0 * c for e, c0 in self._terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus ----------------------------------------------------------

    def differentiate(self, index: int) -> "Polynomial":
        if not (0 <= index < self.ring.arity):
            raise IndexError("variable index out of range")
        terms: Dict[Exponents, object] = {}
        for e, c in self._terms.items():
            k = e[index]
            if k == 0:
                continue
            e2 = e[:index] + (k - 1,) + e[index + 1 :]
            nc = c * k
            acc = terms.get(e2)
            s = nc if acc is None else acc + nc
            if s:
                terms[e2] = s
            elif acc is not None:
                del terms[e2]
        return Polynomial(self.ring, terms)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point: Sequence):
        """Evaluate at a point of exact scalars (exact result) or floats.

        Mixed input falls back to complex floating arithmetic.  Exact
        evaluation shares a power table per coordinate and, for rational
        coefficients, works over a common denominator to avoid gcd churn.
        """
        if len(point) != self.ring.arity:
            raise ValueError(
                f"point has length {len(point)}, ring arity is {self.ring.arity}"
            )
        if all(scalar_is_exact(v) for v in point):
            return self._evaluate_exact([self.ring.coerce(v) for v in point])
        return self.evaluate_complex([scalar_to_complex(v) if scalar_is_exact(v) else complex(v) for v in point])

    def _evaluate_exact(self, point):
        gaussian = self.ring.gaussian
        if not gaussian and self._terms:
            return self._evaluate_rational_fast(point)
        powers = []
        for i, v in enumerate(point):
            table = [exact_one(gaussian)]
            for _ in range(self.degree_in(i) if self._terms else 0):
                table.append(table[-1] * v)
            powers.append(table)
        total = exact_zero(gaussian)
        for e, c in self._terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            total = total + term
        return total

    def _evaluate_rational_fast(self, point):
        """Integer-homogenized evaluation: one gcd at the very end.

        Writing x_i = p_i/q_i and clearing the coefficient denominators gives
        value = sum(C_e * prod p_i^{e_i} q_i^{E_i - e_i}) / (D * prod q_i^{E_i})
        with pure integer arithmetic inside the sum.
        """
        import math

        if self._intdata is None:
            denominator = 1
            for c in self._terms.values():
                denominator = denominator * c.denominator // math.gcd(denominator, c.denominator)
            int_coeffs = {e: c.numerator * (denominator // c.denominator)
                          for e, c in self._terms.items()}
            self._intdata = (denominator, int_coeffs)
        denominator, int_coeffs = self._intdata
        n = self.ring.arity
        max_deg = [self.degree_in(i) for i in range(n)]
        p_pow, q_pow = [], []
        for i, v in enumerate(point):
            p, q = v.numerator, v.denominator
            top = max(max_deg[i], 0)
            pt = [1] * (top + 1)
            qt = [1] * (top + 1)
            for k in range(1, top + 1):
                pt[k] = pt[k - 1] * p
                qt[k] = qt[k - 1] * q
            p_pow.append(pt)
            q_pow.append(qt)
        acc = 0
        for e, c in int_coeffs.items():
            term = c
            for i, k in enumerate(e):
                term *= p_pow[i][k] * q_pow[i][max_deg[i] - k]
            acc += term
        denom = denominator
        for i in range(n):
            denom *= q_pow[i][max_deg[i]]
        return Fraction(acc, denom)

    def numeric_data(self):
        """(exponent matrix, complex coefficient vector) for fast evaluation."""
        if self._numeric is None:
            items = self.items_sorted()
            if items:
                exps = np.array([e for e, _ in items], dtype=np.int64)
                coeffs = np.array([scalar_to_complex(c) for _, c in items])
            else:
                exps = np.zeros((0, self.ring.arity), dtype=np.int64)
                coeffs = np.zeros(0, dtype=complex)
            self._numeric = (exps, coeffs)
        return self._numeric

    def evaluate_complex(self, point) -> complex:
        exps, coeffs = self.numeric_data()
        if len(coeffs) == 0:
            return 0j
        pt = np.asarray(point, dtype=complex)
        monomials = np.prod(pt[None, :] ** exps, axis=1)
        return complex(np.dot(coeffs, monomials))

    # -- substitution ------------------------------------------------------

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute images[i] for variable i; images live in a common ring."""
        if len(images) != self.ring.arity:
            raise ValueError("need one image per variable")
        target = images[0].ring
        power_cache: List[List[Polynomial]] = [[target.one(), img] for img in images]
        result = target.zero()
        for e, c in self._terms.items():
            term = target.constant(c)
            for i, k in enumerate(e):
                cache = power_cache[i]
                while len(cache) <= k:
                    cache.append(cache[-1] * cache[1])
                if k:
                    term = term * cache[k]
            result = result + term
        return result

    def rename_ring(self, other: PolynomialRing) -> "Polynomial":
        """Reinterpret in ``other`` by variable name (a superset or reorder)."""
        mapping = [other.index_of(name) for name in self.ring.variables]
        terms: Dict[Exponents, object] = {}
        for e, c in self._terms.items():
            e2 = [0] * other.arity
            for i, k in enumerate(e):
                e2[mapping[i]] = k
            terms[tuple(e2)] = coerce_scalar(c, other.gaussian)
        return Polynomial(other, terms)

    def restrict_ring(self, other: PolynomialRing) -> "Polynomial":
        """Move to a subring; fails if the polynomial uses a dropped variable."""
        keep = []
        for i, name in enumerate(self.ring.variables):
            keep.append(other.variables.index(name) if name in other.variables else None)
        terms: Dict[Exponents, object] = {}
        for e, c in self._terms.items():
            e2 = [0] * other.arity
            for i, k in enumerate(e):
                if keep[i] is None:
                    if k:
                        raise ValueError(
                            f"polynomial involves dropped variable {self.ring.variables[i]!r}"
                        )
                else:
                    e2[keep[i]] = k
            terms[tuple(e2)] = coerce_scalar(c, other.gaussian)
        return Polynomial(other, terms)

    # -- printing ----------------------------------------------------------

    def to_text(self) -> str:
        """Canonical text: terms in decreasing grevlex order, explicit ``*``."""
        if not self._terms:
            return "0"
        pieces: List[str] = []
        for e, c in self.items_sorted():
            neg, body = _format_term(self.ring, e, c)
            if not pieces:
                pieces.append(f"-{body}" if neg else body)
            else:
                pieces.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(pieces)


def _format_scalar(value) -> Tuple[bool, str, bool]:
    """Return (negative, text, needs_parens) for a nonzero exact scalar."""
    if isinstance(value, GaussianRational):
        if value.im == 0:
            return _format_scalar(value.re)
        if value.re == 0:
            neg, text, _ = _format_scalar(value.im)
            if text == "1":
                return neg, "i", False
            return neg, f"{text}*i", False
        parts = []
        re_neg, re_text, _ = _format_scalar(value.re)
        parts.append(f"-{re_text}" if re_neg else re_text)
        im_neg, im_text, _ = _format_scalar(value.im)
        im_body = "i" if im_text == "1" else f"{im_text}*i"
        parts.append(f"- {im_body}" if im_neg else f"+ {im_body}")
        return False, "(" + " ".join(parts) + ")", False
    frac = Fraction(value)
    neg = frac < 0
    frac = abs(frac)
    text = str(frac.numerator) if frac.denominator == 1 else f"{frac.numerator}/{frac.denominator}"
    return neg, text, False


def _format_term(ring: PolynomialRing, exps: Exponents, coeff) -> Tuple[bool, str]:
    neg, scalar_text, _ = _format_scalar(coeff)
    factors = []
    for name, k in zip(ring.variables, exps):
        if k == 1:
            factors.append(name)
        elif k > 1:
            factors.append(f"{name}^{k}")
    if not factors:
        return neg, scalar_text
    if scalar_text == "1":
        return neg, "*".join(factors)
    return neg, "*".join([scalar_text] + factors)


@dataclass(frozen=True)
class PolynomialMap:
    """A polynomial map F = (f_1, ..., f_l) : K^n -> K^l."""

    ring: PolynomialRing
    components: Tuple[Polynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("a polynomial map needs at least one component")
        for f in self.components:
            if f.ring != self.ring:
                raise ValueError("all components must share the map's ring")

    @property
    def n(self) -> int:
        return self.ring.arity

    @property
    def l(self) -> int:
        return len(self.components)

    def evaluate(self, point):
        return [f.evaluate(point) for f in self.components]


class PolyMatrix:
    """Rectangular matrix of polynomials over one ring."""

    def __init__(self, ring: PolynomialRing, rows: Sequence[Sequence[Polynomial]]):
        self.ring = ring
        self.rows = [list(r) for r in rows]
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("matrix rows have unequal lengths")
        for r in self.rows:
            for p in r:
                if p.ring != ring:
                    raise ValueError("matrix entries must share the ring")

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def transpose(self) -> "PolyMatrix":
        m, n = self.shape
        return PolyMatrix(self.ring, [[self.rows[i][j] for i in range(m)] for j in range(n)])

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix(
            self.ring, [[self.rows[i][j] for j in col_idx] for i in row_idx]
        )

    def determinant(self) -> Polynomial:
        m, n = self.shape
        if m != n:
            raise ValueError("determinant of a non-square matrix")
        if m == 0:
            return self.ring.one()
        if m == 1:
            return self.rows[0][0]
        total = self.ring.zero()
        for j in range(m):
            entry = self.rows[0][j]
            if entry.is_zero():
                continue
            minor = self.submatrix(range(1, m), [k for k in range(m) if k != j])
            cofactor = entry * minor.determinant()
            total = total + (cofactor if j % 2 == 0 else -cofactor)
        return total


def jacobian(F: PolynomialMap) -> PolyMatrix:
    """l x n matrix of partials; row j is the gradient of f_j."""
    return PolyMatrix(
        F.ring,
        [[f.differentiate(i) for i in range(F.n)] for f in F.components],
    )


def minors(M: PolyMatrix, size: int) -> List[Polynomial]:
    """All size x size minors, in lexicographic row/column-subset order."""
    m, n = M.shape
    if size < 0 or size > min(m, n):
        raise ValueError(f"minor size {size} out of range for shape {M.shape}")
    if size == 0:
        return [M.ring.one()]
    out = []
    for rows in itertools.combinations(range(m), size):
        for cols in itertools.combinations(range(n), size):
            out.append(M.submatrix(rows, cols).determinant())
    return out
