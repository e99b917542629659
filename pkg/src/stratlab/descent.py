"""Cancellation descent: arc directions that defeat the dominant gradient terms.

Random monomial arcs only ever see the leading quasi-homogeneous layer of the
gradient at a singular point, so limit covectors that live in deeper layers
(they exist precisely where the leading layer degenerates) are invisible to
them.  This module expands the gradient in weighted Taylor layers around the
probe point, samples the zero cone of the leading layer (a null-space draw
when that layer is linear, damped least squares otherwise), and hands back
arc coefficient vectors along which the next layer surfaces.

Only single-component maps get descent; maps with l > 1 fall back to random
arcs alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .config import DescentConfig
from .poly import Polynomial, PolynomialMap
from .scalars import scalar_is_exact, scalar_to_complex

Alpha = Tuple[int, ...]


class DerivativePool:
    """Memoized iterated partials of one polynomial."""

    def __init__(self, f: Polynomial):
        self.n = f.ring.arity
        self._cache: Dict[Alpha, Polynomial] = {(0,) * self.n: f}

    def get(self, alpha: Alpha) -> Polynomial:
        cached = self._cache.get(alpha)
        if cached is not None:
            return cached
        i = max(k for k, a in enumerate(alpha) if a > 0)
        parent = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        p = self.get(parent).differentiate(i)
        self._cache[alpha] = p
        return p


def _factorial_alpha(alpha: Alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def _compositions_weighted(weights: Sequence[int], level: int, abs_cap: int):
    """All alpha with sum(w_i * a_i) == level and |alpha| <= abs_cap."""
    n = len(weights)

    def rec(i: int, remaining: int, used: int):
        if i == n - 1:
            w = weights[i]
            if remaining % w == 0:
                a = remaining // w
                if used + a <= abs_cap:
                    yield (a,)
            return
        w = weights[i]
        for a in range(0, min(remaining // w, abs_cap - used) + 1):
            for rest in rec(i + 1, remaining - a * w, used + a):
                yield (a,) + rest

    yield from rec(0, level, 0)


@dataclass(frozen=True)
class LayerForm:
    """One gradient component's layer: map alpha -> complex coefficient."""

    component: int
    coeffs: Dict[Alpha, complex]

    def evaluate(self, gamma: np.ndarray) -> complex:
        total = 0j
        for alpha, c in self.coeffs.items():
            term = c
            for g, a in zip(gamma, alpha):
                if a:
                    term *= g ** a
            total += term
        return total

    def gradient(self, gamma: np.ndarray) -> np.ndarray:
        out = np.zeros(len(gamma), dtype=complex)
        for alpha, c in self.coeffs.items():
            for k, a in enumerate(alpha):
                if not a:
                    continue
                term = c * a
                for i, (g, ai) in enumerate(zip(gamma, alpha)):
                    power = ai - 1 if i == k else ai
                    if power:
                        term *= g ** power
                out[k] += term
        return out

    def is_linear(self) -> bool:
        return all(sum(a) == 1 for a in self.coeffs)

    def support(self) -> set:
        out = set()
        for alpha in self.coeffs:
            out.update(i for i, a in enumerate(alpha) if a)
        return out


class GradientLayers:
    """Weighted Taylor layers of the gradient of a single-component map."""

    def __init__(self, F: PolynomialMap, point: Sequence,
                 pool: Optional[DerivativePool] = None):
        if F.l != 1:
            raise ValueError("descent supports single-component maps only")
        self.F = F
        self.n = F.n
        self.pool = pool if pool is not None else DerivativePool(F.components[0])
        self.point = list(point)
        self.exact = all(scalar_is_exact(v) for v in self.point)
        if self.exact:
            self.point = [F.ring.coerce(v) for v in self.point]
        self.gradient_degree = max(
            (F.components[0].differentiate(i).total_degree() for i in range(self.n)),
            default=-1,
        )
        self._coeff_cache: Dict[Alpha, Optional[complex]] = {}

    def _coefficient(self, full_alpha: Alpha) -> Optional[complex]:
        """partial^alpha f (point) as complex, None when exactly zero."""
        cached = self._coeff_cache.get(full_alpha, "miss")
        if cached != "miss":
            return cached
        p = self.pool.get(full_alpha)
        if p.is_zero():
            value: Optional[complex] = None
        elif self.exact:
            exact_value = p.evaluate(self.point)
            value = scalar_to_complex(exact_value) if exact_value else None
        else:
            v = p.evaluate_complex([scalar_to_complex(x) if scalar_is_exact(x) else complex(x) for x in self.point])
            scale = max(1.0, max(abs(scalar_to_complex(c)) for c in p.terms.values()))
            value = v if abs(v) > 1e-10 * scale else None
        self._coeff_cache[full_alpha] = value
        return value

    def layer(self, weights: Sequence[int], level: int, abs_cap: int) -> List[LayerForm]:
        forms = []
        for j in range(self.n):
            coeffs: Dict[Alpha, complex] = {}
            for alpha in _compositions_weighted(weights, level, abs_cap):
                if sum(alpha) == 0:
                    continue  # the gradient vanishes at the probe point
                full = tuple(a + (1 if k == j else 0) for k, a in enumerate(alpha))
                if sum(alpha) > self.gradient_degree:
                    continue
                c = self._coefficient(full)
                if c is not None:
                    coeffs[alpha] = c / _factorial_alpha(alpha)
            if coeffs:
                forms.append(LayerForm(j, coeffs))
        return forms

    def leading_layer(self, weights: Sequence[int], abs_cap: int,
                      max_level: int) -> Optional[Tuple[int, List[LayerForm]]]:
        for level in range(1, max_level + 1):
            forms = self.layer(weights, level, abs_cap)
            if forms:
                return level, forms
        return None


# ---------------------------------------------------------------------------
# zero-cone sampling


def _null_space_directions(forms: List[LayerForm], n: int, real: bool,
                           rng: np.random.Generator, cfg: DescentConfig) -> List[np.ndarray]:
    matrix = np.zeros((len(forms), n), dtype=complex)
    for r, form in enumerate(forms):
        for alpha, c in form.coeffs.items():
            i = alpha.index(1)
            matrix[r, i] = c
    if real:
        matrix = matrix.real
    _, s, vh = np.linalg.svd(matrix)
    tol = (s[0] if s.size else 0.0) * 1e-10
    rank = int(np.sum(s > tol)) if s.size else 0
    null = vh[rank:]
    if null.shape[0] == 0:
        return []
    out = []
    for _ in range(cfg.null_dirs):
        if real:
            combo = rng.standard_normal(null.shape[0]) @ null
            combo = combo.astype(complex)
        else:
            combo = (rng.standard_normal(null.shape[0])
                     + 1j * rng.standard_normal(null.shape[0])) @ null
        nrm = np.linalg.norm(combo)
        if nrm > 1e-12:
            out.append(combo / nrm)
    return out


def _ls_zero_directions(forms: List[LayerForm], n: int, real: bool,
                        rng: np.random.Generator, cfg: DescentConfig) -> List[np.ndarray]:
    def unpack(z: np.ndarray) -> np.ndarray:
        if real:
            return z.astype(complex)
        return z[:n] + 1j * z[n:]

    def residuals(z: np.ndarray) -> np.ndarray:
        gamma = unpack(z)
        vals = [form.evaluate(gamma) for form in forms]
        out = [np.linalg.norm(gamma) ** 2 - 1.0]
        for v in vals:
            out.append(v.real)
            if not real:
                out.append(v.imag)
        return np.asarray(out)

    def jac(z: np.ndarray) -> np.ndarray:
        gamma = unpack(z)
        rows = [2.0 * z]
        for form in forms:
            g = form.gradient(gamma)
            if real:
                rows.append(g.real)
            else:
                rows.append(np.concatenate([g.real, -g.imag]))
                rows.append(np.concatenate([g.imag, g.real]))
        return np.vstack(rows)

    dim = n if real else 2 * n
    solutions: List[np.ndarray] = []
    for _ in range(cfg.ls_starts):
        x0 = rng.standard_normal(dim)
        x0 /= np.linalg.norm(x0)
        try:
            res = least_squares(residuals, x0, jac=jac, method="trf",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except Exception:
            continue
        gamma = unpack(res.x)
        nrm = np.linalg.norm(gamma)
        if nrm < 1e-8:
            continue
        # no rescaling or phase rotation: the layer forms are only
        # quasi-homogeneous, so the zero cone is not scale-invariant
        if max(abs(form.evaluate(gamma)) for form in forms) > cfg.ls_residual_tol:
            continue
        if any(
            min(np.linalg.norm(gamma - g), np.linalg.norm(gamma + g)) < 1e-5
            for g in solutions
        ):
            continue
        solutions.append(gamma)
        if len(solutions) >= cfg.max_solutions:
            break
    return solutions


def _poly_eval(coeffs_desc: np.ndarray, u: complex) -> complex:
    return complex(np.polyval(coeffs_desc, u))


def _two_variable_zero_directions(forms: List[LayerForm], pair: Tuple[int, int],
                                  weights: Sequence[int], n: int, real: bool,
                                  cfg: DescentConfig) -> List[np.ndarray]:
    """Zero directions of a leading system supported on two coordinates.

    Dehomogenize along the weighted scaling: branches with gamma_b != 0 are
    (u, 1) with u a common root of the dehomogenized forms.  Repeated roots
    are located as simple roots of the derivative cascade and Newton-polished,
    which keeps the direction accurate to machine precision (a least-squares
    solve can only pin a multiplicity-m root to residual^(1/m)).
    """
    a, b = pair
    polys = []
    for form in forms:
        deg = max(alpha[a] for alpha in form.coeffs)
        coeffs = np.zeros(deg + 1, dtype=complex)
        for alpha, c in form.coeffs.items():
            coeffs[deg - alpha[a]] += c
        polys.append(coeffs)

    # candidates from every derivative level: a multiplicity-m root of p is a
    # well-conditioned simple root of p^(m-1)
    candidates: List[Tuple[complex, np.ndarray, int]] = []
    for coeffs in polys:
        work = coeffs.copy()
        level = 0
        while len(work) > 1:
            for r in np.roots(work):
                if abs(r) < 1e6:
                    candidates.append((r, work.copy(), level))
            work = np.polyder(work)
            level += 1

    def polish(u: complex, coeffs: np.ndarray) -> complex:
        scale = max(np.abs(coeffs)) * max(1.0, abs(u)) ** (len(coeffs) - 1)
        der = np.polyder(coeffs)
        for _ in range(10):
            d = _poly_eval(der, u)
            if abs(d) < 1e-15 * scale:
                break
            step = _poly_eval(coeffs, u) / d
            u = u - step
            if abs(step) < 1e-16 * max(1.0, abs(u)):
                break
        return u

    def passes_filter(u: complex) -> bool:
        for coeffs in polys:
            scale = max(np.abs(coeffs)) * max(1.0, abs(u)) ** (len(coeffs) - 1)
            if abs(_poly_eval(coeffs, u)) > 1e-7 * scale:
                return False
        return True

    polished: List[Tuple[complex, int]] = []
    for u, coeffs, level in candidates:
        u = polish(u, coeffs)
        if real and abs(u.imag) > 1e-10:
            continue
        if passes_filter(u):
            polished.append((u, level))

    # cluster candidates; keep the deepest-level representative: candidates
    # polished on shallow levels of a repeated root carry O(eps^(1/m)) error
    accepted: List[complex] = []
    cluster_radius = 1e-5
    for u, level in sorted(polished, key=lambda t: -t[1]):
        if not any(abs(u - v) < cluster_radius * max(1.0, abs(v)) for v in accepted):
            accepted.append(u)

    # the gamma_b = 0 direction survives iff no form has a pure gamma_a monomial
    extra: List[Tuple[complex, complex]] = []
    if all(all(alpha[b] > 0 for alpha in form.coeffs) for form in forms):
        extra.append((1.0 + 0j, 0j))

    out = []
    for u in accepted:
        s = (1.0 / max(1.0, abs(u))) ** (1.0 / weights[a])
        gamma = np.zeros(n, dtype=complex)
        gamma[a] = s ** weights[a] * u
        gamma[b] = s ** weights[b]
        out.append(gamma)
    for ga, gb in extra:
        gamma = np.zeros(n, dtype=complex)
        gamma[a], gamma[b] = ga, gb
        out.append(gamma)
    return out


def _free_coordinate_variants(gamma: np.ndarray, free: List[int], real: bool,
                              rng: np.random.Generator, cfg: DescentConfig) -> List[np.ndarray]:
    if not free:
        return [gamma]
    # never rescale the constrained block: the zero cone of a merely
    # quasi-homogeneous layer is not invariant under plain scaling
    variants = [gamma]
    zeroed = gamma.copy()
    zeroed[free] = 0.0
    if np.linalg.norm(zeroed) > 1e-10:
        variants.append(zeroed)
    for _ in range(cfg.free_variants):
        v = gamma.copy()
        draw = rng.standard_normal(len(free))
        if not real:
            draw = draw + 1j * rng.standard_normal(len(free))
        v[free] = 0.7 * draw / max(1.0, np.linalg.norm(draw))
        variants.append(v)
    return variants


def descent_directions(layers: GradientLayers, weights: Sequence[int], real: bool,
                       rng: np.random.Generator, cfg: DescentConfig) -> List[np.ndarray]:
    """Unit arc-coefficient vectors on the zero cone of the leading layer."""
    n = layers.n
    abs_cap = cfg.max_abs_order if n <= 6 else cfg.max_abs_order_big
    found = layers.leading_layer(weights, abs_cap, cfg.max_level)
    if found is None:
        return []
    _, forms = found
    if all(form.is_linear() for form in forms):
        return _null_space_directions(forms, n, real, rng, cfg)
    constrained = set()
    for form in forms:
        constrained |= form.support()
    free = [i for i in range(n) if i not in constrained]
    if len(constrained) == 2:
        pair = tuple(sorted(constrained))
        dirs = _two_variable_zero_directions(forms, pair, weights, n, real, cfg)
    else:
        dirs = _ls_zero_directions(forms, n, real, rng, cfg)
    out: List[np.ndarray] = []
    for gamma in dirs:
        out.extend(_free_coordinate_variants(gamma, free, real, rng, cfg))
    return out


def candidate_weights(F: PolynomialMap, rng: np.random.Generator,
                      cfg: DescentConfig) -> List[Tuple[int, ...]]:
    """Weight vectors for the layer expansion: uniform, Newton-pair normals
    (two variables only), and a few random draws."""
    n = F.n
    weights = [tuple([1] * n)]
    if n == 2 and F.l == 1:
        f = F.components[0]
        for i in range(2):
            g = f.differentiate(i)
            exps = list(g.terms.keys())
            for a, b in itertools.combinations(exps, 2):
                d0, d1 = a[0] - b[0], a[1] - b[1]
                if d0 == 0 or d1 == 0:
                    continue
                w0, w1 = abs(d1), abs(d0)
                g_ = math.gcd(w0, w1)
                w = (w0 // g_, w1 // g_)
                if max(w) <= 8 and w not in weights:
                    weights.append(w)
    for _ in range(cfg.random_weights):
        w = tuple(int(x) for x in rng.integers(1, cfg.max_weight + 1, size=n))
        if w not in weights:
            weights.append(w)
    return weights
