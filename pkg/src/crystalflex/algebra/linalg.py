"""Polynomial matrices, symbolic minors and SVD-based numeric rank."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .elimination import determinant
from .laurent import LaurentPolynomial, monomial_normalize, poly_eval

__all__ = [
    "PolynomialMatrix",
    "symbolic_minors",
    "numeric_rank",
    "rank_threshold",
    "exact_rank",
    "DEFAULT_RANK_TOL",
    "ROUNDOFF_FLOOR",
]

DEFAULT_RANK_TOL = 1e-9
# singular values below this fraction of the entry magnitudes are roundoff
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class PolynomialMatrix:
    entries: tuple[tuple[LaurentPolynomial, ...], ...]
    d: int
    row_labels: tuple = field(default=())
    col_labels: tuple = field(default=())

    def __post_init__(self):
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged polynomial matrix")
            for p in row:
                if p.d != self.d:
                    raise ValueError("all entries must share the same d")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> tuple[LaurentPolynomial, ...]:
        return self.entries[i]

    def evaluate(self, z: Sequence) -> np.ndarray:
        """Entrywise evaluation at one point of (C\\{0})^d."""
        out = np.zeros(self.shape, dtype=complex)
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                if p:
                    out[i, j] = poly_eval(p, z)
        return out

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> list[list[LaurentPolynomial]]:
        return [[self.entries[i][j] for j in cols] for i in rows]


def symbolic_minors(m: PolynomialMatrix, size: int) -> list[LaurentPolynomial]:
    """All ``size``-by-``size`` minors, each monomial-normalized.

    Order: row index tuples outermost, column tuples innermost, both in
    lexicographic order. Zero minors are kept (as zero polynomials).
    """
    if not 1 <= size <= min(m.rows, m.cols):
        raise ValueError(f"minor size {size} out of range for a {m.rows}x{m.cols} matrix")
    out = []
    for rows in combinations(range(m.rows), size):
        for cols in combinations(range(m.cols), size):
            det = determinant(m.submatrix(rows, cols), m.d)
            out.append(monomial_normalize(det)[0] if det else det)
    return out


def rank_threshold(smax, tol: float, scale=None):
    """Cut-off for counting singular values: ``tol * sigma_max``, raised to
    ``ROUNDOFF_FLOOR * scale`` when the caller knows the magnitude of the
    terms that were summed into the entries (a matrix that cancels to
    roundoff then has rank 0)."""
    thr = tol * np.asarray(smax, dtype=float)
    if scale is not None:
        thr = np.maximum(thr, ROUNDOFF_FLOOR * np.asarray(scale, dtype=float))
    return thr


def numeric_rank(matrix, tol: float = DEFAULT_RANK_TOL, scale: float | None = None) -> tuple[int, np.ndarray]:
    """Rank and orthonormal kernel basis from the SVD.

    Singular values above ``tol * sigma_max`` count toward the rank (see
    ``rank_threshold`` for the role of ``scale``); the kernel basis is
    returned as columns of a ``(cols, cols - rank)`` array.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.atleast_2d(np.asarray(matrix, dtype=complex))
    ncols = a.shape[1]
    if a.size == 0:
        return 0, np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = 0 if smax == 0 else int(np.sum(s > rank_threshold(smax, tol, scale)))
    kernel = vh[rank:].conj().T
    return rank, kernel


def exact_rank(rows) -> int:
    """Rank of a matrix of rationals (or Gaussian rationals) by exact elimination."""
    a = [list(r) for r in rows]
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if a[r][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = Fraction(1) / a[rank][c]
        for r in range(rank + 1, nrows):
            if a[r][c] != 0:
                f = a[r][c] * inv
                for j in range(c, ncols):
                    a[r][j] = a[r][j] - f * a[rank][j]
        rank += 1
        if rank == nrows:
            break
    return rank
