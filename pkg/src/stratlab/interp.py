"""Exact Hermite interpolation of values and first partials at several nodes.

Given t pairwise-distinct nodes in K^d, a value and a full gradient per node,
builds a polynomial A with deg(A) < 2td matching all the data exactly.  The
construction is the block one: after a generic shear makes every coordinate
pairwise distinct across nodes, each node gets a block

    A_q = prod_{q' != q, i} (X_i - v_{q'}^i)^2 * (sum_i a_i (X_i - v_q^i) + a_0)

whose affine coefficients are solved from the 1 + d conditions at node q; the
interpolant is the sum of the blocks pulled back through the shear.  All
arithmetic is exact rational; residuals are identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .poly import Polynomial, PolynomialRing


@dataclass(frozen=True)
class InterpolationProblem:
    nodes: Tuple[Tuple[Fraction, ...], ...]
    values: Tuple[Fraction, ...]
    gradients: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        nodes = tuple(tuple(Fraction(v) for v in node) for node in self.nodes)
        values = tuple(Fraction(v) for v in self.values)
        gradients = tuple(tuple(Fraction(v) for v in g) for g in self.gradients)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gradients", gradients)
        if not self.nodes:
            raise ValueError("need at least one node")
        d = len(self.nodes[0])
        if d < 1:
            raise ValueError("nodes must have at least one coordinate")
        if any(len(node) != d for node in self.nodes):
            raise ValueError("nodes have inconsistent dimensions")
        if len(self.values) != len(self.nodes):
            raise ValueError("need one value per node")
        if len(self.gradients) != len(self.nodes) or any(
            len(g) != d for g in self.gradients
        ):
            raise ValueError("need one full gradient per node")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("nodes must be pairwise distinct")

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def dimension(self) -> int:
        return len(self.nodes[0])

    @property
    def degree_bound(self) -> int:
        return 2 * self.node_count * self.dimension


def _apply_matrix(C: Sequence[Sequence[Fraction]], node: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    return tuple(
        sum((row[j] * node[j] for j in range(len(node))), Fraction(0)) for row in C
    )


def _collisions(nodes: Sequence[Sequence[Fraction]], i: int) -> List[Tuple[int, int]]:
    out = []
    for q1 in range(len(nodes)):
        for q2 in range(q1 + 1, len(nodes)):
            if nodes[q1][i] == nodes[q2][i]:
                out.append((q1, q2))
    return out


def generic_coordinate_shear(nodes: Sequence[Sequence[Fraction]]):
    """Invertible C making every coordinate pairwise distinct across nodes.

    Built from shears x_i <- x_i + lambda * x_j with small integer lambda;
    each accepted shear strictly reduces the number of colliding pairs in its
    coordinate, so at most (t choose 2) shears per coordinate occur.
    Returns (C, transformed nodes)."""
    nodes = [tuple(Fraction(v) for v in node) for node in nodes]
    if len(set(nodes)) != len(nodes):
        raise ValueError("nodes must be pairwise distinct")
    t = len(nodes)
    d = len(nodes[0])
    C = [[Fraction(1 if r == c else 0) for c in range(d)] for r in range(d)]
    current = [list(node) for node in nodes]
    max_lambda = (t * (t - 1)) // 2 + 2
    for i in range(d):
        guard = 0
        while True:
            bad = _collisions(current, i)
            if not bad:
                break
            guard += 1
            if guard > (t * (t - 1)) // 2 + 1:
                raise RuntimeError("shear search failed to converge")
            q1, q2 = bad[0]
            j = next(
                k for k in range(d) if current[q1][k] != current[q2][k]
            )
            for lam_abs in range(1, max_lambda + 1):
                fixed = False
                for lam in (Fraction(lam_abs), Fraction(-lam_abs)):
                    candidate = [list(node) for node in current]
                    for node in candidate:
                        node[i] = node[i] + lam * node[j]
                    if len(_collisions(candidate, i)) < len(bad):
                        current = candidate
                        for c in range(d):
                            C[i][c] = C[i][c] + lam * C[j][c]
                        fixed = True
                        break
                if fixed:
                    break
            else:
                raise RuntimeError("no small-integer shear separates the nodes")
    return tuple(tuple(row) for row in C), [tuple(node) for node in current]


def _matrix_inverse_transpose(C: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    d = len(C)
    aug = [list(C[r]) + [Fraction(1 if c == r else 0) for c in range(d)] for r in range(d)]
    for col in range(d):
        pivot = next(r for r in range(col, d) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    inverse = [row[d:] for row in aug]
    return [[inverse[c][r] for c in range(d)] for r in range(d)]  # transpose


def _univariate_square_factors(ring: PolynomialRing, i: int,
                               roots: Sequence[Fraction]) -> Dict[int, Fraction]:
    """Coefficient dict (degree -> coeff) of prod (X_i - r)^2 as univariate."""
    coeffs = {0: Fraction(1)}
    for r in roots:
        # multiply by (X - r)^2 = X^2 - 2r X + r^2
        new: Dict[int, Fraction] = {}
        for deg, c in coeffs.items():
            for shift, factor in ((2, Fraction(1)), (1, -2 * r), (0, r * r)):
                key = deg + shift
                new[key] = new.get(key, Fraction(0)) + c * factor
        coeffs = {k: v for k, v in new.items() if v}
    return coeffs


def _eval_univariate(coeffs: Dict[int, Fraction], x: Fraction) -> Fraction:
    total = Fraction(0)
    for deg, c in coeffs.items():
        total += c * x ** deg
    return total


def _derivative_univariate(coeffs: Dict[int, Fraction]) -> Dict[int, Fraction]:
    return {deg - 1: c * deg for deg, c in coeffs.items() if deg > 0}


def hermite_interpolate(problem: InterpolationProblem,
                        ring: Optional[PolynomialRing] = None) -> Polynomial:
    """Block-construction interpolant with deg < 2 t d, exact over Q."""
    d = problem.dimension
    t = problem.node_count
    if ring is None:
        ring = PolynomialRing(tuple(f"X{i + 1}" for i in range(d)))
    if ring.arity != d:
        raise ValueError("ring arity does not match node dimension")

    C, sheared = generic_coordinate_shear(problem.nodes)
    Cinv_T = _matrix_inverse_transpose(C)
    gradients = [
        tuple(
            sum((Cinv_T[i][j] * problem.gradients[q][j] for j in range(d)), Fraction(0))
            for i in range(d)
        )
        for q in range(t)
    ]

    total = ring.zero()
    for q0 in range(t):
        other_roots = [
            [sheared[q][i] for q in range(t) if q != q0] for i in range(d)
        ]
        factors = [_univariate_square_factors(ring, i, other_roots[i]) for i in range(d)]
        node = sheared[q0]
        values = [_eval_univariate(factors[i], node[i]) for i in range(d)]
        derivs = [
            _eval_univariate(_derivative_univariate(factors[i]), node[i])
            for i in range(d)
        ]
        P_at_node = Fraction(1)
        for v in values:
            P_at_node *= v
        # P_at_node is nonzero because coordinates are pairwise distinct
        a0 = problem.values[q0] / P_at_node
        a = []
        for i in range(d):
            dP_i = derivs[i]
            for k in range(d):
                if k != i:
                    dP_i *= values[k]
            a.append((gradients[q0][i] - a0 * dP_i) / P_at_node)

        # expand the block as a tensor product over a common denominator:
        # pure integer multiplies inside, one Fraction per final term
        denom = 1
        int_factors = []
        for i in range(d):
            fd = 1
            for c in factors[i].values():
                fd = fd * c.denominator // __import__("math").gcd(fd, c.denominator)
            int_factors.append(
                {deg: c.numerator * (fd // c.denominator) for deg, c in factors[i].items()}
            )
            denom *= fd
        block_int: Dict[Tuple[int, ...], int] = {(0,) * d: 1}
        for i in range(d):
            new_terms: Dict[Tuple[int, ...], int] = {}
            for exps, c in block_int.items():
                for deg, uc in int_factors[i].items():
                    key = exps[:i] + (deg,) + exps[i + 1 :]
                    new_terms[key] = new_terms.get(key, 0) + c * uc
            block_int = {k: v for k, v in new_terms.items() if v}
        P_poly = Polynomial(
            ring, {e: Fraction(c, denom) for e, c in block_int.items()}
        )
        affine = ring.constant(a0)
        for i in range(d):
            affine = affine + (ring.variable(i) - ring.constant(node[i])).scale(a[i])
        total = total + P_poly * affine

    identity = all(
        C[i][j] == (1 if i == j else 0) for i in range(d) for j in range(d)
    )
    if identity:
        return total
    # pull back through the shear: X_i -> sum_j C_ij X_j
    images = []
    for i in range(d):
        img = ring.zero()
        for j in range(d):
            if C[i][j]:
                img = img + ring.variable(j).scale(C[i][j])
        images.append(img)
    return total.substitute(images)


def verify_interpolation(A: Polynomial, problem: InterpolationProblem):
    """Exact residual check: returns (ok, residual table).

    The table lists one row per condition: (node index, which, expected,
    actual).  ``ok`` also requires deg(A) < 2 t d.
    """
    d = problem.dimension
    table = []
    ok = True
    partials = [A.differentiate(i) for i in range(d)]
    for q, node in enumerate(problem.nodes):
        value = A.evaluate(list(node))
        if value != problem.values[q]:
            ok = False
        table.append((q, "value", problem.values[q], value))
        for i in range(d):
            actual = partials[i].evaluate(list(node))
            if actual != problem.gradients[q][i]:
                ok = False
            table.append((q, f"d/dX{i + 1}", problem.gradients[q][i], actual))
    if A.total_degree() >= problem.degree_bound:
        ok = False
        table.append((-1, "degree", f"< {problem.degree_bound}", A.total_degree()))
    return ok, table
