"""Velocity fields, first-order flexes and rigidity verdicts.

A velocity field is a map ``k -> u(k)`` in C^{dn}, where ``u(k)`` stacks the
velocities of the n motif joints translated into cell k (joint-major,
coordinate-minor, same as the transfer-function columns).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .algebra import DEFAULT_RANK_TOL, exact_rank, numeric_rank, univariate_roots
from .framework import CrystalFramework, bar_vector, require_valid
from .spectrum import GeometricSpectrum, geometric_spectrum, is_spectrum_finite
from .transfer import (
    RankThresholds,
    flexible_lattice_matrix,
    periodic_rigidity_matrix,
    periodic_rigidity_matrix_exact,
    rank_thresholds,
    transfer_function,
)

__all__ = [
    "WindowField",
    "FlexCheck",
    "check_flex_window",
    "PGFlex",
    "FperFlex",
    "monomials",
    "factor_periodic_flexes",
    "fper_flex_space",
    "rigid_motion_flexes",
    "pg_flex_space",
    "difference_reduce",
    "FlexDimension",
    "flex_space_dimension",
    "RigidityVerdict",
    "rigidity_verdict",
    "DEFAULT_FLEX_TOL",
    "DEFAULT_DEGREE_CAP",
]

DEFAULT_FLEX_TOL = 1e-8
DEFAULT_DEGREE_CAP = 6
_COEFF_ZERO = 1e-12


@dataclass(frozen=True)
class WindowField:
    """Field values on the box ``kmin <= k <= kmax``; ``values[idx]`` is
    ``u(kmin + idx)``."""

    kmin: tuple[int, ...]
    values: np.ndarray

    @property
    def d(self) -> int:
        return len(self.kmin)

    @property
    def extent(self) -> tuple[int, ...]:
        return tuple(self.values.shape[:-1])

    @property
    def kmax(self) -> tuple[int, ...]:
        return tuple(a + e - 1 for a, e in zip(self.kmin, self.extent))

    def at(self, k: Sequence[int]) -> np.ndarray:
        return self.values[tuple(a - b for a, b in zip(k, self.kmin))]

    def cells(self):
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.kmin, self.kmax)))

    def translated(self, t: Sequence[int]) -> "WindowField":
        """The field ``k -> u(k - t)`` on the translated window."""
        return WindowField(tuple(a + b for a, b in zip(self.kmin, t)), self.values)

    @classmethod
    def from_function(cls, fn, kmin: Sequence[int], kmax: Sequence[int]) -> "WindowField":
        kmin, kmax = tuple(kmin), tuple(kmax)
        cells = list(itertools.product(*(range(a, b + 1) for a, b in zip(kmin, kmax))))
        vals = np.array([np.asarray(fn(k), dtype=complex) for k in cells])
        extent = tuple(b - a + 1 for a, b in zip(kmin, kmax))
        return cls(kmin, vals.reshape(extent + (vals.shape[-1],)))


def _box(d: int, size: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    lo = -(size // 2)
    return (lo,) * d, (lo + size - 1,) * d


@dataclass(frozen=True)
class FlexCheck:
    ok: bool
    violations: list  # (edge index, anchor cell, residual)
    max_residual: float
    checked: int

    def __bool__(self):
        return self.ok


def _edge_arrays(fw: CrystalFramework):
    d = fw.d
    ev, ew, ek, el, pe = [], [], [], [], []
    for e in fw.edges:
        base = [min(a, b) for a, b in zip(e.k, e.l)]
        ev.append(fw.joint_index(e.v))
        ew.append(fw.joint_index(e.w))
        ek.append([a - b for a, b in zip(e.k, base)])
        el.append([a - b for a, b in zip(e.l, base)])
        pe.append([float(x) for x in bar_vector(fw, e)])
    return (
        np.array(ev, dtype=np.int64),
        np.array(ek, dtype=np.int64).reshape(-1, d),
        np.array(ew, dtype=np.int64),
        np.array(el, dtype=np.int64).reshape(-1, d),
        np.array(pe, dtype=np.complex128).reshape(-1, d),
    )


def check_flex_window(fw: CrystalFramework, fld: WindowField, tol: float = DEFAULT_FLEX_TOL) -> FlexCheck:
    """Test the first-order flex condition on every bar inside the window.

    A bar instance passes when ``|p(e).(u_v - u_w)| <= tol * |p(e)| * scale``
    with ``scale`` the largest velocity magnitude in the window.
    """
    if fld.values.size == 0:
        raise ValueError("empty window")
    if fld.values.shape[-1] != fw.d * fw.n:
        raise ValueError(f"field has {fld.values.shape[-1]} components, expected dn={fw.d * fw.n}")
    ev, ek, ew, el, pe = _edge_arrays(fw)
    res = _kernels.edge_residuals(fld.values, ev, ek, ew, el, pe, fw.d)
    norms = np.linalg.norm(pe, axis=1)
    scale = float(np.max(np.abs(fld.values)))
    inside = ~np.isnan(res)
    mag = np.where(inside, np.abs(np.nan_to_num(res)), 0.0)
    limit = tol * norms[:, None] * scale
    bad = np.argwhere(inside & (mag > limit))
    cells = np.array(np.unravel_index(np.arange(mag.shape[1]), fld.extent)).T + np.array(fld.kmin)
    viol = []
    for e, c in bad:
        base = [min(a, b) for a, b in zip(fw.edges[e].k, fw.edges[e].l)]
        viol.append((int(e), tuple(int(x) - b for x, b in zip(cells[c], base)), float(mag[e, c])))
    rel = mag / np.where(norms[:, None] * scale > 0, norms[:, None] * scale, 1.0)
    return FlexCheck(not viol, viol, float(rel.max()) if rel.size else 0.0, int(inside.sum()))


# -- polynomial-weighted geometric flexes ------------------------------

def monomials(d: int, max_deg: int) -> list[tuple[int, ...]]:
    """Exponents of total degree <= max_deg, graded then lexicographic."""
    out = []
    for deg in range(max_deg + 1):
        block = [e for e in itertools.product(range(deg + 1), repeat=d) if sum(e) == deg]
        out.extend(sorted(block, reverse=True))
    return out


def _shift_matrix(exps: Sequence[tuple[int, ...]], s: Sequence[int]) -> np.ndarray:
    """S with (S c)_beta = coefficient of k^beta in sum_alpha c_alpha (k+s)^alpha."""
    index = {e: i for i, e in enumerate(exps)}
    out = np.zeros((len(exps), len(exps)))
    for a, alpha in enumerate(exps):
        ranges = [range(ai + 1) for ai in alpha]
        for beta in itertools.product(*ranges):
            coef = 1.0
            for ai, bi, si in zip(alpha, beta, s):
                coef *= comb(ai, bi) * float(si) ** (ai - bi)
            if coef:
                out[index[beta], a] += coef
    return out


@dataclass(frozen=True)
class PGFlex:
    """The field ``k -> omega^k h(k)``; ``coeffs[i, j]`` multiplies
    ``k^exponents[j]`` in component ``i`` of h."""

    omega: tuple[complex, ...]
    exponents: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray

    @property
    def d(self) -> int:
        return len(self.omega)

    def _active(self) -> list[int]:
        mags = np.abs(self.coeffs).max(axis=0) if self.coeffs.size else np.zeros(0)
        top = mags.max() if mags.size else 0.0
        return [j for j, mval in enumerate(mags) if mval > _COEFF_ZERO * max(top, 1e-300)]

    def multidegree(self) -> tuple[int, ...]:
        """Lexicographically largest exponent with a nonzero coefficient."""
        act = self._active()
        if not act:
            return (-1,) * self.d
        return max(self.exponents[j] for j in act)

    def degree_in(self, j: int) -> int:
        act = self._active()
        return max((self.exponents[i][j] for i in act), default=-1)

    def total_degree(self) -> int:
        act = self._active()
        return max((sum(self.exponents[i]) for i in act), default=-1)

    def values(self, cells: np.ndarray) -> np.ndarray:
        cells = np.atleast_2d(np.asarray(cells))
        exps = np.array(self.exponents)
        mono = np.prod(cells[:, None, :].astype(float) ** exps[None, :, :], axis=2)
        geo = np.prod(np.asarray(self.omega, dtype=complex)[None, :] ** cells, axis=1)
        return (mono @ self.coeffs.T) * geo[:, None]

    def __call__(self, k: Sequence[int]) -> np.ndarray:
        return self.values(np.array([k]))[0]

    def window(self, kmin: Sequence[int], kmax: Sequence[int]) -> WindowField:
        kmin, kmax = tuple(kmin), tuple(kmax)
        cells = np.array(list(itertools.product(*(range(a, b + 1) for a, b in zip(kmin, kmax)))))
        extent = tuple(b - a + 1 for a, b in zip(kmin, kmax))
        vals = self.values(cells)
        return WindowField(kmin, vals.reshape(extent + (vals.shape[-1],)))

    def centered_window(self, size: int = 5) -> WindowField:
        return self.window(*_box(self.d, size))

    @classmethod
    def constant(cls, omega: Sequence[complex], vector: np.ndarray) -> "PGFlex":
        d = len(omega)
        return cls(tuple(complex(w) for w in omega), ((0,) * d,), np.asarray(vector, dtype=complex).reshape(-1, 1))


@dataclass(frozen=True)
class FperFlex:
    """The field ``u(k) = u0 + (Xk, ..., Xk)``."""

    u0: np.ndarray
    X: np.ndarray

    def __call__(self, k: Sequence[int]) -> np.ndarray:
        d = self.X.shape[0]
        n = self.u0.size // d
        return self.u0 + np.tile(self.X @ np.asarray(k, dtype=float), n)

    def window(self, kmin: Sequence[int], kmax: Sequence[int]) -> WindowField:
        return WindowField.from_function(self, kmin, kmax)

    def centered_window(self, size: int = 5) -> WindowField:
        return self.window(*_box(self.X.shape[0], size))

    def is_periodic(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.X) <= atol))

    def as_pgflex(self) -> PGFlex:
        """Rewrite as a degree <= 1 pg-field with omega = 1."""
        d = self.X.shape[0]
        n = self.u0.size // d
        exps = monomials(d, 1)
        coeffs = np.zeros((d * n, len(exps)), dtype=complex)
        coeffs[:, 0] = self.u0
        for j in range(d):
            e = tuple(int(i == j) for i in range(d))
            coeffs[:, exps.index(e)] = np.tile(self.X[:, j], n)
        return PGFlex((1.0 + 0j,) * d, tuple(exps), coeffs)


def factor_periodic_flexes(fw: CrystalFramework, omega: Sequence[complex], tol: float = DEFAULT_RANK_TOL) -> list[PGFlex]:
    """Basis of flexes ``k -> omega^k a`` with a in ker Psi(omega^{-1})."""
    tf = transfer_function(fw)
    omega = tuple(complex(w) for w in omega)
    if any(w == 0 for w in omega):
        raise ValueError("omega must lie in (C\\{0})^d")
    _, ker = tf.kernel_at([1 / w for w in omega], tol)
    return [PGFlex.constant(omega, ker[:, i]) for i in range(ker.shape[1])]


def _decode_fper(vec: np.ndarray, d: int, n: int) -> FperFlex:
    dn = d * n
    y = vec[dn:].reshape(d, d)  # row t holds lattice block t
    return FperFlex(np.asarray(vec[:dn], dtype=complex), -y.T.astype(complex))


def _encode_fper(f: FperFlex) -> np.ndarray:
    return np.concatenate([f.u0, (-f.X).T.reshape(-1)])


def fper_flex_space(fw: CrystalFramework, tol: float = DEFAULT_RANK_TOL) -> list[FperFlex]:
    """Basis of the flexible-lattice periodic flexes, from ker R_fper."""
    fl = flexible_lattice_matrix(fw)
    _, ker = numeric_rank(fl.array(), tol)
    return [_decode_fper(ker[:, i], fw.d, fw.n) for i in range(ker.shape[1])]


def _skew_basis(d: int) -> list[np.ndarray]:
    out = []
    for s, t in itertools.combinations(range(d), 2):
        b = np.zeros((d, d))
        b[t, s] = 1.0
        b[s, t] = -1.0
        out.append(b)
    return out


def _rigid_fper(fw: CrystalFramework) -> list[FperFlex]:
    d, n = fw.d, fw.n
    out = []
    for t in range(d):
        e = np.zeros(d)
        e[t] = 1.0
        out.append(FperFlex(np.tile(e, n).astype(complex), np.zeros((d, d), dtype=complex)))
    pos = fw.positions_array()
    amat = fw.periods_array()
    for b in _skew_basis(d):
        u0 = np.concatenate([b @ p for p in pos]).astype(complex)
        out.append(FperFlex(u0, (b @ amat).astype(complex)))
    return out


def rigid_motion_flexes(fw: CrystalFramework) -> list[PGFlex]:
    """Translations, then infinitesimal rotations, as omega = 1 pg-flexes."""
    require_valid(fw)
    return [f.as_pgflex() for f in _rigid_fper(fw)]


def _pg_system(fw: CrystalFramework, omega: Sequence[complex], max_deg: int):
    d, n = fw.d, fw.n
    exps = monomials(d, max_deg)
    nm = len(exps)
    dn = d * n
    omega = np.asarray(omega, dtype=complex)
    cache: dict[tuple, np.ndarray] = {}

    def shift(s):
        if s not in cache:
            cache[s] = _shift_matrix(exps, s)
        return cache[s]

    system = np.zeros((fw.m * nm, dn * nm), dtype=complex)
    mags = np.zeros(system.shape)
    for r, e in enumerate(fw.edges):
        pe = [float(x) for x in bar_vector(fw, e)]
        vi, wi = fw.joint_index(e.v), fw.joint_index(e.w)
        fk = np.prod(omega ** np.array(e.k))
        fl = np.prod(omega ** np.array(e.l))
        sk, sl = shift(e.k), shift(e.l)
        rows = slice(r * nm, (r + 1) * nm)
        for c in range(d):
            if pe[c] == 0:
                continue
            cv = (vi * d + c) * nm
            cw = (wi * d + c) * nm
            system[rows, cv:cv + nm] += pe[c] * fk * sk
            system[rows, cw:cw + nm] -= pe[c] * fl * sl
            mags[rows, cv:cv + nm] += np.abs(pe[c] * fk * sk)
            mags[rows, cw:cw + nm] += np.abs(pe[c] * fl * sl)
    return system, exps, float(np.linalg.norm(mags))


def pg_flex_space(
    fw: CrystalFramework, omega: Sequence[complex], max_deg: int, tol: float = DEFAULT_RANK_TOL
) -> list[PGFlex]:
    """Basis of the flexes ``k -> omega^k h(k)`` with h of total degree <= max_deg."""
    if max_deg < 0:
        raise ValueError("max_deg must be >= 0")
    require_valid(fw)
    system, exps, scale = _pg_system(fw, omega, max_deg)
    _, ker = numeric_rank(system, tol, scale)
    dn, nm = fw.d * fw.n, len(exps)
    omega = tuple(complex(w) for w in omega)
    return [PGFlex(omega, tuple(exps), ker[:, i].reshape(dn, nm)) for i in range(ker.shape[1])]


def difference_reduce(f: PGFlex, j: int) -> PGFlex:
    """Degree-lowering combination of a pg-field with one of its translates.

    Returns the pg form of ``u(k) - omega_j u(k - e_j)``, whose polynomial is
    ``h(k) - h(k - e_j)``; it lies in the span of translates of u, so it is a
    flex whenever u is.
    """
    if f.degree_in(j) < 1:
        raise ValueError(f"polynomial has degree 0 in direction {j}")
    s = tuple(-1 if i == j else 0 for i in range(f.d))
    shift = _shift_matrix(f.exponents, s)
    coeffs = f.coeffs - f.coeffs @ shift.T
    return PGFlex(f.omega, f.exponents, coeffs)


# -- dimension and verdicts ---------------------------------------------

@dataclass
class FlexDimension:
    kind: str  # "finite" | "infinite" | "unknown"
    dim: int | None
    certification: str  # "exact" | "probabilistic"
    per_point: list = field(default_factory=list)  # (omega, [dim at D=0,1,..])
    spectrum: GeometricSpectrum | None = None


def flex_space_dimension(
    fw: CrystalFramework, max_deg_cap: int = DEFAULT_DEGREE_CAP, tol: float = DEFAULT_RANK_TOL, seed: int = 0,
    spectrum: GeometricSpectrum | None = None,
) -> FlexDimension:
    """Dimension of the first-order flex space, via pg-flex degree stabilization
    at each spectrum point (infinite when the spectrum is)."""
    gs = spectrum if spectrum is not None else geometric_spectrum(fw, tol=tol, seed=seed)
    cert = "exact" if gs.certification == "exact" else "probabilistic"
    finite = is_spectrum_finite(gs)
    if finite == "infinite":
        return FlexDimension("infinite", None, cert, spectrum=gs)
    if gs.kind == "positive_dimensional":
        return FlexDimension("unknown", None, cert, spectrum=gs)
    total = 0
    per_point = []
    for pt in gs.points:
        dims = []
        for deg in range(max_deg_cap + 1):
            dims.append(len(pg_flex_space(fw, pt.omega, deg, tol)))
            if deg >= 1 and dims[-1] == dims[-2]:
                break
        per_point.append((pt.omega, dims))
        if len(dims) < 2 or dims[-1] != dims[-2]:
            return FlexDimension("unknown", None, cert, per_point, gs)
        total += dims[-1]
    return FlexDimension("finite", total, cert, per_point, gs)


@dataclass
class RigidityVerdict:
    gamma_trivial: bool | None
    periodic_kernel_is_translations: bool
    fper_rank_extremal: bool
    psi_rank_extremal: bool | None
    first_order_rigid: str  # "rigid" | "flexible" | "unknown"
    certification: str  # "exact" | "probabilistic"
    thresholds: RankThresholds
    ranks: dict
    spectrum: GeometricSpectrum
    witness: object | None = None
    witness_kind: str | None = None
    failed: list = field(default_factory=list)


def _orth_complement_pick(vectors: np.ndarray, trivial: np.ndarray) -> np.ndarray | None:
    """Column of span(vectors) farthest from span(trivial), or None."""
    if vectors.shape[1] == 0:
        return None
    if trivial.shape[1]:
        q, _ = np.linalg.qr(trivial)
        resid = vectors - q @ (q.conj().T @ vectors)
    else:
        resid = vectors
    u, s, _ = np.linalg.svd(resid, full_matrices=False)
    if s.size == 0 or s[0] < 1e-8:
        return None
    return u[:, 0] * s[0]


def _point_on_component(g, tf, tol) -> tuple[complex, ...] | None:
    from fractions import Fraction

    d = g.d
    trials = [Fraction(2), Fraction(3), Fraction(1, 2), Fraction(5, 3), Fraction(-2)]
    if g.is_zero():
        # every point is in the spectrum
        for val in trials:
            z = [complex(val)] * d
            if tf.kernel_dim_at(z, tol) >= 1:
                return tuple(1 / x for x in z)
        return None
    for var in reversed(range(d)):
        others = [i for i in range(d) if i != var]
        for val in trials:
            sub = g
            for i in others:
                sub = sub.substitute(i, val)
            if sub.is_zero() or sub.is_constant():
                continue
            for r in univariate_roots(sub, var):
                if abs(r.value) < 1e-12:
                    continue
                z = [complex(val)] * d
                z[var] = r.value
                if all(abs(x - 1) < 1e-9 for x in z):
                    continue
                if tf.kernel_dim_at(z, tol) >= 1:
                    return tuple(1 / x for x in z)
    return None


def rigidity_verdict(fw: CrystalFramework, tol: float = DEFAULT_RANK_TOL, seed: int = 0,
                     spectrum: GeometricSpectrum | None = None) -> RigidityVerdict:
    """Decide first-order rigidity from the spectrum, R_per and R_fper ranks."""
    require_valid(fw)
    d, n = fw.d, fw.n
    dn = d * n
    th = rank_thresholds(fw)
    tf = transfer_function(fw)
    gs = spectrum if spectrum is not None else geometric_spectrum(fw, tol=tol, seed=seed)

    rper = exact_rank(periodic_rigidity_matrix_exact(fw))
    fl = flexible_lattice_matrix(fw)
    rfper = fl.rank()
    periodic_ok = rper == th.at_one
    fper_ok = rfper == th.fper

    nontrivial = gs.nontrivial_points()
    if gs.kind == "finite":
        gamma_trivial = not nontrivial
    elif gs.kind == "positive_dimensional":
        gamma_trivial = False
    else:
        gamma_trivial = False if nontrivial else None
    psi_ok = None if gamma_trivial is None else (gamma_trivial and periodic_ok)

    failed = []
    witness, kind = None, None
    window = _box(d, 5)
    if not periodic_ok:
        failed.append("periodic_kernel_is_translations")
        _, ker = numeric_rank(periodic_rigidity_matrix(fw), tol)
        trans = np.array([np.tile(np.eye(d)[t], n) for t in range(d)]).T
        vec = _orth_complement_pick(ker, trans)
        if vec is not None and witness is None:
            cand = PGFlex.constant((1.0,) * d, vec / np.linalg.norm(vec))
            if check_flex_window(fw, cand.window(*window)).ok:
                witness, kind = cand, "periodic"
    if not fper_ok:
        failed.append("fper_rank_extremal")
        if witness is None:
            _, ker = numeric_rank(fl.array(), tol)
            trivial = np.array([_encode_fper(f) for f in _rigid_fper(fw)]).T
            vec = _orth_complement_pick(ker, trivial)
            if vec is not None:
                cand = _decode_fper(vec / np.linalg.norm(vec), d, n)
                if check_flex_window(fw, cand.window(*window)).ok:
                    witness, kind = cand, "flexible_lattice"
    if gamma_trivial is False:
        failed.append("gamma_trivial")
        if witness is None:
            omega = nontrivial[0].omega if nontrivial else None
            if omega is None and gs.components:
                omega = _point_on_component(gs.components[0], tf, tol)
            if omega is not None:
                flexes = factor_periodic_flexes(fw, omega, tol)
                if flexes and check_flex_window(fw, flexes[0].window(*window)).ok:
                    witness, kind = flexes[0], "factor_periodic"

    if periodic_ok and fper_ok and gamma_trivial:
        verdict = "rigid"
    elif failed and witness is not None:
        verdict = "flexible"
    else:
        verdict = "unknown"
    return RigidityVerdict(
        gamma_trivial=gamma_trivial,
        periodic_kernel_is_translations=periodic_ok,
        fper_rank_extremal=fper_ok,
        psi_rank_extremal=psi_ok,
        first_order_rigid=verdict,
        certification="exact" if gs.certification == "exact" else "probabilistic",
        thresholds=th,
        ranks={"R_per": rper, "R_fper": rfper, "dn": dn},
        spectrum=gs,
        witness=witness,
        witness_kind=kind,
        failed=failed,
    )
