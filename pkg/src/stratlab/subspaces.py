"""Small dense subspace linear algebra: orthonormal row bases, projectors,
rank decisions with gap diagnostics, subspace distances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal row basis of a subspace of K^n (rows are covectors)."""

    rows: np.ndarray  # (k, n) complex
    ambient: int

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        if rows.size == 0:
            rows = rows.reshape(0, self.ambient)
        object.__setattr__(self, "rows", rows)
        if rows.shape[1] != self.ambient:
            raise ValueError(f"rows have ambient {rows.shape[1]}, expected {self.ambient}")
        gram = rows @ rows.conj().T
        if rows.shape[0] and np.max(np.abs(gram - np.eye(rows.shape[0]))) > ORTHO_TOL:
            raise ValueError("basis rows are not orthonormal to 1e-10")

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    def projector(self) -> np.ndarray:
        return self.rows.conj().T @ self.rows

    def contains_row(self, row: np.ndarray, tol: float = 1e-6) -> bool:
        row = np.asarray(row, dtype=complex)
        norm = np.linalg.norm(row)
        if norm == 0:
            return True
        residual = row - (row @ self.projector().T)
        return np.linalg.norm(residual) / norm < tol


def orthonormal_rows(rows: np.ndarray, rank_tol: float = 1e-9) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    if rows.shape[0] == 0:
        return rows
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return rows[:0]
    keep = s > rank_tol * s[0]
    return vh[keep]


@dataclass(frozen=True)
class SpanDecision:
    basis: SubspaceBasis
    singular_values: np.ndarray
    gap: float  # ratio sigma_kept_min / sigma_dropped_max (inf if clean)
    dimension: int


def span_of_covectors(stack: np.ndarray, ambient: int, rank_tol: float) -> SpanDecision:
    """Span of a stack of (unnormalized) covectors with an SVD rank decision.

    Keeps singular values sigma_i > rank_tol * sigma_max; the gap diagnostic is
    the ratio between the smallest kept and the largest dropped value.
    """
    stack = np.atleast_2d(np.asarray(stack, dtype=complex))
    if stack.size == 0 or not np.any(np.abs(stack) > 0):
        empty = SubspaceBasis(np.zeros((0, ambient)), ambient)
        return SpanDecision(empty, np.zeros(0), float("inf"), 0)
    norms = np.linalg.norm(stack, axis=1)
    stack = stack[norms > 0] / norms[norms > 0, None]
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    keep = s > rank_tol * s[0]
    kept = int(np.sum(keep))
    dropped = s[~keep]
    gap = float(s[keep][-1] / dropped[0]) if (kept and dropped.size) else float("inf")
    basis = SubspaceBasis(vh[:kept], ambient)
    return SpanDecision(basis, s, gap, kept)


def projector_distance(a: SubspaceBasis, b: SubspaceBasis, kind: str = "fro") -> float:
    diff = a.projector() - b.projector()
    if kind == "fro":
        return float(np.linalg.norm(diff))
    return float(np.linalg.norm(diff, 2))


def subspaces_equal(a: SubspaceBasis, b: SubspaceBasis, tol: float = 1e-6) -> bool:
    if a.dim != b.dim:
        return False
    return projector_distance(a, b, kind="spec") < tol


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - |<u,v>| / (|u||v|): phase- and sign-blind covector distance."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 1.0
    return float(1.0 - min(1.0, abs(np.vdot(u, v)) / (nu * nv)))


def canonical_phase(row: np.ndarray) -> np.ndarray:
    """Rotate a covector so its largest-magnitude entry is real positive."""
    row = np.asarray(row, dtype=complex)
    idx = int(np.argmax(np.abs(row)))
    pivot = row[idx]
    if pivot == 0:
        return row
    return row * (abs(pivot) / pivot)


def snap_projector(P: np.ndarray, gap: float = 0.5):
    """Snap an approximate orthogonal projector to an exact one.

    Returns (basis rows, rank) or None if some eigenvalue sits farther than
    ``gap``/2 from {0, 1}.
    """
    P = np.asarray(P, dtype=complex)
    H = (P + P.conj().T) / 2
    w, v = np.linalg.eigh(H)
    near_one = w > 0.5
    if np.any(np.minimum(np.abs(w), np.abs(w - 1)) > gap / 2):
        return None
    rows = v[:, near_one].conj().T
    return orthonormal_rows(rows), int(np.sum(near_one))
