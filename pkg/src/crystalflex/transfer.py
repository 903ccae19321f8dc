"""Transfer function, periodic rigidity matrices and the supercell rank oracle.

Column order everywhere is joint-major, coordinate-minor: column
``i * d + c`` is coordinate ``c`` of motif joint ``i`` (joints in input
order).  Rows follow the framework's edge order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .algebra import (
    DEFAULT_RANK_TOL,
    LaurentPolynomial,
    PolynomialMatrix,
    exact_rank,
    numeric_rank,
)
from .framework import CrystalFramework, bar_vector, require_valid, supercell

__all__ = [
    "RankThresholds",
    "rank_thresholds",
    "TransferFunction",
    "transfer_function",
    "periodic_rigidity_matrix",
    "periodic_rigidity_matrix_exact",
    "FlexLatticeMatrix",
    "flexible_lattice_matrix",
    "SupercellRankIdentity",
    "roots_of_unity_grid",
    "supercell_rank_identity",
]


class RankThresholds(NamedTuple):
    """Extremal ranks: Psi(1), Psi(z) for z != 1, and R_fper."""

    at_one: int
    generic: int
    fper: int


def rank_thresholds(fw: CrystalFramework) -> RankThresholds:
    d, n = fw.d, fw.n
    return RankThresholds(at_one=d * n - d, generic=d * n, fper=d * n + d * (d - 1) // 2)


@dataclass(frozen=True)
class TransferFunction:
    framework: CrystalFramework
    psi: PolynomialMatrix
    psi_poly: PolynomialMatrix
    row_shifts: tuple[tuple[int, ...], ...]
    # sparse term arrays of psi for batched numeric evaluation
    _terms: tuple = field(repr=False, compare=False, default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.psi.shape

    @property
    def thresholds(self) -> RankThresholds:
        return rank_thresholds(self.framework)

    def evaluate(self, z: Sequence) -> np.ndarray:
        """Psi(z) at one point of (C\\{0})^d."""
        return self.evaluate_batch(np.asarray([z], dtype=complex))[0]

    def evaluate_batch(self, z: np.ndarray) -> np.ndarray:
        """Psi at a batch of points, ``(S, d) -> (S, m, dn)``."""
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        if np.any(z == 0):
            raise ValueError("transfer function is defined on (C\\{0})^d only")
        rows, cols, coef, exps = self._terms
        return _kernels.eval_terms(z, rows, cols, coef, exps, self.shape)

    def magnitude_batch(self, z: np.ndarray) -> np.ndarray:
        """Frobenius norm of the entrywise sums of |term| at each point; the
        roundoff reference for rank decisions."""
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        rows, cols, coef, exps = self._terms
        mags = _kernels.eval_terms(np.abs(z).astype(complex), rows, cols,
                                   np.abs(coef).astype(complex), exps, self.shape)
        return np.linalg.norm(mags.real, axis=(1, 2))

    def kernel_at(self, z: Sequence, tol: float = DEFAULT_RANK_TOL) -> tuple[int, np.ndarray]:
        """Numeric rank and orthonormal kernel basis of Psi(z)."""
        scale = float(self.magnitude_batch(np.asarray([z], dtype=complex))[0])
        return numeric_rank(self.evaluate(z), tol, scale)

    def rank_at(self, z: Sequence, tol: float = DEFAULT_RANK_TOL) -> int:
        return self.kernel_at(z, tol)[0]

    def kernel_dim_at(self, z: Sequence, tol: float = DEFAULT_RANK_TOL) -> int:
        return self.shape[1] - self.rank_at(z, tol)

    def ranks_batch(self, z: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
        return _kernels.batch_ranks(self.evaluate_batch(z), tol, self.magnitude_batch(z))


def _compile_terms(psi: PolynomialMatrix):
    rows, cols, coef, exps = [], [], [], []
    for i, row in enumerate(psi.entries):
        for j, p in enumerate(row):
            for e, c in p.terms.items():
                rows.append(i)
                cols.append(j)
                coef.append(complex(c))
                exps.append(e)
    d = psi.d
    return (
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(coef, dtype=np.complex128),
        np.array(exps, dtype=np.int64).reshape(len(exps), d),
    )


def transfer_function(fw: CrystalFramework) -> TransferFunction:
    """Build Psi(z): the m x dn Laurent matrix whose kernel at omega^{-1}
    holds the factor-periodic flexes with multi-factor omega."""
    require_valid(fw)
    d, n = fw.d, fw.n
    zero = LaurentPolynomial.zero(d)
    entries, poly_entries, shifts = [], [], []
    for e in fw.edges:
        pe = bar_vector(fw, e)
        vi, wi = fw.joint_index(e.v), fw.joint_index(e.w)
        zk = LaurentPolynomial.monomial([-x for x in e.k])
        zl = LaurentPolynomial.monomial([-x for x in e.l])
        row = [zero] * (d * n)
        for c in range(d):
            if vi == wi:
                row[vi * d + c] = (zk - zl).scale(pe[c])
            else:
                row[vi * d + c] = zk.scale(pe[c])
                row[wi * d + c] = zl.scale(-pe[c])
        nonzero = [p for p in row if p]
        mins = [min(p.min_exponents()[i] for p in nonzero) for i in range(d)]
        shift = tuple(-x for x in mins)
        entries.append(tuple(row))
        poly_entries.append(tuple(p.shift(shift) if p else p for p in row))
        shifts.append(shift)
    row_labels = tuple(f"e{i}:({e.v},{e.k})-({e.w},{e.l})" for i, e in enumerate(fw.edges))
    col_labels = tuple((j.id, c + 1) for j in fw.joints for c in range(d))
    psi = PolynomialMatrix(tuple(entries), d, row_labels, col_labels)
    psi_poly = PolynomialMatrix(tuple(poly_entries), d, row_labels, col_labels)
    return TransferFunction(fw, psi, psi_poly, tuple(shifts), _compile_terms(psi))


def periodic_rigidity_matrix_exact(fw: CrystalFramework) -> list[list[Fraction]]:
    """R_per = Psi(1), built directly from the bar vectors."""
    require_valid(fw)
    d, n = fw.d, fw.n
    out = []
    for e in fw.edges:
        pe = bar_vector(fw, e)
        row = [Fraction(0)] * (d * n)
        vi, wi = fw.joint_index(e.v), fw.joint_index(e.w)
        if vi != wi:
            for c in range(d):
                row[vi * d + c] = pe[c]
                row[wi * d + c] = -pe[c]
        out.append(row)
    return out


def periodic_rigidity_matrix(fw: CrystalFramework) -> np.ndarray:
    return np.array(periodic_rigidity_matrix_exact(fw), dtype=float).reshape(fw.m, fw.d * fw.n)


@dataclass(frozen=True)
class FlexLatticeMatrix:
    """R_fper: dn framework columns, then d^2 lattice columns.

    Lattice block ``t`` (columns ``dn + t*d .. dn + t*d + d - 1``) multiplies
    column ``t`` of the lattice matrix; the row entry there is
    ``(l_t - k_t) p(e)``.  A kernel vector ``(u0, y)`` therefore describes
    the field ``u(k) = u0 + (Xk, ..., Xk)`` with ``X[:, t] = -y_t``.
    """

    entries: tuple[tuple[Fraction, ...], ...]
    d: int
    n: int

    @property
    def framework_columns(self) -> int:
        return self.d * self.n

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), self.d * self.n + self.d * self.d

    @property
    def extremal_rank(self) -> int:
        return self.d * self.n + self.d * (self.d - 1) // 2

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float).reshape(self.shape)

    def rank(self, tol: float | None = None) -> int:
        """Exact rank by default; numeric SVD rank when ``tol`` is given."""
        if tol is None:
            return exact_rank(self.entries)
        return numeric_rank(self.array(), tol)[0]


def flexible_lattice_matrix(fw: CrystalFramework) -> FlexLatticeMatrix:
    require_valid(fw)
    d, n = fw.d, fw.n
    rows = []
    for e in fw.edges:
        pe = bar_vector(fw, e)
        row = [Fraction(0)] * (d * n + d * d)
        vi, wi = fw.joint_index(e.v), fw.joint_index(e.w)
        if vi != wi:
            for c in range(d):
                row[vi * d + c] = pe[c]
                row[wi * d + c] = -pe[c]
        for t in range(d):
            for c in range(d):
                row[d * n + t * d + c] = (e.l[t] - e.k[t]) * pe[c]
        rows.append(tuple(row))
    return FlexLatticeMatrix(tuple(rows), d, n)


class SupercellRankIdentity(NamedTuple):
    lhs: int
    rhs: int
    block_ranks: dict


def roots_of_unity_grid(reps: Sequence[int]) -> list[tuple[complex, ...]]:
    """All omega with omega_i^{reps_i} = 1, in row-major order."""
    axes = [[np.exp(2j * np.pi * j / r) for j in range(r)] for r in reps]
    return [tuple(p) for p in itertools.product(*axes)]


def supercell_rank_identity(
    fw: CrystalFramework, reps: Sequence[int], tol: float = DEFAULT_RANK_TOL
) -> SupercellRankIdentity:
    """Compare rank R_per(supercell) (exact) with the sum of rank Psi(omega)
    over the reps-th roots of unity (numeric)."""
    big = supercell(fw, reps)
    lhs = exact_rank(periodic_rigidity_matrix_exact(big))
    tf = transfer_function(fw)
    pts = roots_of_unity_grid(reps)
    ranks = tf.ranks_batch(np.array(pts), tol)
    idx = list(itertools.product(*(range(r) for r in reps)))
    blocks = {j: int(r) for j, r in zip(idx, ranks)}
    return SupercellRankIdentity(lhs, int(sum(ranks)), blocks)
