"""RUM spectrum (torus part) and geometric flex spectrum of a framework.

All root finding happens in the z-domain on the polynomial transfer
matrix; a reported spectrum point is ``omega = 1/z`` componentwise, so
omega is in the spectrum iff Psi(omega^{-1}) has a nontrivial kernel.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .algebra import (
    DEFAULT_RANK_TOL,
    GaussianRational,
    LaurentPolynomial,
    NotDivisibleError,
    gcd_exact,
    gcd_many,
    poly_eval,
    resultant,
    symbolic_minors,
    univariate_roots,
)
from .framework import CrystalFramework, require_valid
from .transfer import TransferFunction, transfer_function

__all__ = [
    "RumSample",
    "rum_scan",
    "rum_rational_scan",
    "rational_angles",
    "SpectrumPoint",
    "GeometricSpectrum",
    "geometric_spectrum",
    "is_spectrum_finite",
    "rum_samples_to_csv",
    "CLUSTER_RADIUS",
]

log = logging.getLogger(__name__)

CLUSTER_RADIUS = 1e-6
_BATCH = 1 << 14


@dataclass(frozen=True)
class RumSample:
    omega: tuple[complex, ...]
    rank: int
    kernel_dim: int


def _scan(tf: TransferFunction, omegas: np.ndarray, tol: float) -> list[RumSample]:
    dn = tf.shape[1]
    out = []
    for start in range(0, len(omegas), _BATCH):
        chunk = omegas[start:start + _BATCH]
        ranks = tf.ranks_batch(1.0 / chunk, tol)
        for om, r in zip(chunk, ranks):
            if r < dn:
                out.append(RumSample(tuple(complex(x) for x in om), int(r), int(dn - r)))
    return out


def _torus_axis(turns: Sequence[Fraction]) -> np.ndarray:
    # exact values at the four quarter turns avoid spurious 1e-17 imaginary parts
    axis = np.exp(2j * np.pi * np.array([float(a) for a in turns]))
    for i, a in enumerate(turns):
        if (4 * a).denominator == 1:
            axis[i] = 1j ** int(4 * a)
    return axis


def rum_scan(fw: CrystalFramework, grid_n: int, tol: float = DEFAULT_RANK_TOL) -> list[RumSample]:
    """Rank-drop samples of Psi(omega^{-1}) on the uniform torus grid.

    Grid coordinates are ``exp(2 pi i j / grid_n)``; samples come out in
    row-major order (last coordinate fastest).
    """
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    tf = transfer_function(fw)
    axis = _torus_axis([Fraction(j, grid_n) for j in range(grid_n)])
    omegas = np.array(list(itertools.product(axis, repeat=fw.d)), dtype=complex)
    return _scan(tf, omegas, tol)


def rational_angles(max_order: int) -> list[Fraction]:
    """Distinct fractions a/q in [0, 1) with 1 <= q <= max_order, sorted."""
    return sorted({Fraction(a, q) for q in range(1, max_order + 1) for a in range(q)})


def rum_rational_scan(fw: CrystalFramework, max_order: int, tol: float = DEFAULT_RANK_TOL) -> list[RumSample]:
    """Rank drops at all tuples of roots of unity of order at most ``max_order``."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    tf = transfer_function(fw)
    axis = _torus_axis(rational_angles(max_order))
    omegas = np.array(list(itertools.product(axis, repeat=fw.d)), dtype=complex)
    return _scan(tf, omegas, tol)


def rum_samples_to_csv(samples: Sequence[RumSample], d: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = []
    for i in range(1, d + 1):
        header += [f"omega_{i}_re", f"omega_{i}_im"]
    writer.writerow(header + ["rank", "kernel_dim"])
    for s in samples:
        row = []
        for w in s.omega:
            row += [format(w.real + 0.0, ".17g"), format(w.imag + 0.0, ".17g")]
        writer.writerow(row + [s.rank, s.kernel_dim])
    return buf.getvalue()


# -- geometric spectrum -----------------------------------------------

@dataclass(frozen=True)
class SpectrumPoint:
    omega: tuple[complex, ...]
    kernel_dim: int
    exact: tuple[GaussianRational, ...] | None = None

    def is_one(self, atol: float = CLUSTER_RADIUS) -> bool:
        return all(abs(w - 1) <= atol for w in self.omega)


@dataclass
class GeometricSpectrum:
    kind: str  # "finite" | "positive_dimensional" | "probabilistic"
    certification: str  # "exact" | "sampled"
    # isolated points; off the components when those are present
    points: list[SpectrumPoint] = field(default_factory=list)
    # z-domain factors: omega is in the spectrum iff a factor vanishes at 1/omega
    components: list[LaurentPolynomial] = field(default_factory=list)
    tol: float = DEFAULT_RANK_TOL
    info: dict = field(default_factory=dict)

    def omega_components(self) -> list[LaurentPolynomial]:
        """Components rewritten in the omega variables (z -> omega^{-1})."""
        out = []
        for g in self.components:
            if g.is_zero():
                out.append(g)
                continue
            flipped = LaurentPolynomial({tuple(-e for e in exp): c for exp, c in g.terms.items()}, g.d)
            out.append(flipped.shift([-x for x in flipped.min_exponents()]).monic())
        return out

    def nontrivial_points(self) -> list[SpectrumPoint]:
        return [p for p in self.points if not p.is_one()]


def _kernel_dim(tf: TransferFunction, z: Sequence[complex], tol: float) -> int:
    return tf.kernel_dim_at(z, tol)


def _size(p: LaurentPolynomial) -> float:
    return sum(abs(complex(c)) for c in p.terms.values())


def _dedupe(points: list[SpectrumPoint]) -> list[SpectrumPoint]:
    out: list[SpectrumPoint] = []
    for p in points:
        for i, q in enumerate(out):
            if max(abs(a - b) for a, b in zip(p.omega, q.omega)) <= CLUSTER_RADIUS:
                if q.exact is None and p.exact is not None:
                    out[i] = p
                break
        else:
            out.append(p)
    return sorted(out, key=lambda p: tuple(x for w in p.omega for x in (round(w.real, 9), round(w.imag, 9))))


def _exact_point(roots: Sequence) -> tuple[GaussianRational, ...] | None:
    if any(r is None for r in roots):
        return None
    return tuple(GaussianRational(1) / r for r in roots)


def _numeric_univariate(polys: list[LaurentPolynomial], var: int, values: dict[int, complex]):
    """Substitute complex values for all variables but ``var``; returns
    complex coefficient arrays (index = power of ``var``) and magnitude scales."""
    out = []
    for p in polys:
        deg = max(p.degree(var), 0)
        coeffs = np.zeros(deg + 1, dtype=complex)
        scale = np.zeros(deg + 1)
        for exp, c in p.terms.items():
            t = complex(c)
            for i, x in values.items():
                t *= x ** exp[i]
            coeffs[exp[var]] += t
            scale[exp[var]] += abs(t)
        out.append((coeffs, scale))
    return out


def _merge_close(roots: np.ndarray, radius: float = 1e-5) -> list[complex]:
    """Average clusters of nearby roots; a k-fold root splits into k roots
    at distance ~eps^(1/k), while their mean stays accurate."""
    out: list[list[complex]] = []
    for r in roots:
        for cl in out:
            if abs(r - cl[0]) <= radius * max(1.0, abs(cl[0])):
                cl.append(r)
                break
        else:
            out.append([r])
    return [complex(np.mean(cl)) for cl in out]


def _solve_second(minors: list[LaurentPolynomial], alpha, tf: TransferFunction, tol: float) -> list[SpectrumPoint]:
    """Points (alpha, beta) with all minors vanishing, certified by rank."""
    found = []
    if alpha.exact is not None:
        subs = [f.substitute(0, alpha.exact) for f in minors]
        nonzero = [s for s in subs if s]
        if not nonzero:
            log.warning("all minors vanish on the line z1=%s", alpha.exact)
            return []
        g = gcd_many(nonzero)
        if g.is_constant():
            return []
        betas = univariate_roots(g, 1)
    else:
        a = alpha.value
        data = _numeric_univariate(minors, 1, {0: a})
        usable = []
        for coeffs, scale in data:
            deg = len(coeffs) - 1
            while deg > 0 and abs(coeffs[deg]) <= 1e-12 * max(scale.sum(), 1e-300):
                deg -= 1
            if deg > 0:
                usable.append(coeffs[: deg + 1])
        if not usable:
            return []
        base = min(usable, key=len)
        comp = _merge_close(np.polynomial.polynomial.polyroots(base))
        betas = [type(alpha)(complex(b), None) for b in comp]
    for beta in betas:
        z = (alpha.value, beta.value)
        if any(abs(x) < 1e-12 for x in z):
            continue
        kd = tf.kernel_dim_at(z, tol)
        if kd >= 1:
            found.append(
                SpectrumPoint(tuple(1 / x for x in z), kd, _exact_point((alpha.exact, beta.exact)))
            )
    return found


_STABLE_PAIRS = 3
# depth of shared-factor splitting before the generic-combination fallback
_MAX_SPLIT = 6


def _strip_factor(f: LaurentPolynomial, h: LaurentPolynomial) -> tuple[LaurentPolynomial, int]:
    k = 0
    while True:
        try:
            f = f.exquo(h)
        except NotDivisibleError:
            return f, k
        k += 1


def _first_candidates(minors: list[LaurentPolynomial], seed: int, depth: int = 0) -> LaurentPolynomial | None:
    """Univariate polynomial in z1 vanishing on the projection of the common zeros.

    Every pairwise resultant vanishes there, so the gcd over any subset of
    pairs is a valid (possibly oversized) eliminant; extra roots are
    discarded by back-substitution.  Pairs are taken cheapest first and the
    loop stops once the gcd degree has held for a few nonzero resultants.

    A vanishing resultant means the pair shares a factor h.  The zero set
    then splits exactly as (zeros on h) u (zeros of the family with h
    divided out), and the two eliminants are multiplied.
    """
    d = minors[0].d
    if any(f.is_constant() for f in minors):
        return LaurentPolynomial.constant(1, d)
    flat = [f for f in minors if f.degree(1) <= 0]
    curved = [f for f in minors if f.degree(1) > 0]
    acc = gcd_many(flat) if flat else None
    pairs = sorted(
        itertools.combinations(range(len(curved)), 2),
        key=lambda ij: (curved[ij[0]].degree(1) * curved[ij[1]].degree(1), len(curved[ij[0]].terms) + len(curved[ij[1]].terms), ij),
    )
    stable = 0
    for i, j in pairs:
        if acc is not None and (acc.is_constant() or stable >= _STABLE_PAIRS):
            break
        r = resultant(curved[i], curved[j], 1)
        if not r:
            if acc is None and depth < _MAX_SPLIT:
                split = _split_on(minors, gcd_exact(curved[i], curved[j]), seed, depth)
                if split is not None:
                    return split
            continue
        new = r if acc is None else gcd_exact(acc, r)
        stable = stable + 1 if acc is not None and new.degree(0) == acc.degree(0) else 0
        acc = new
    if acc is None and len(curved) >= 2:
        # every pair shares a factor: eliminate from two generic combinations
        rng = np.random.default_rng(seed)
        for _ in range(8):
            c1 = rng.integers(1, 20, size=len(curved))
            c2 = rng.integers(1, 20, size=len(curved))
            f = sum((q.scale(int(c)) for q, c in zip(curved[1:], c1[1:])), curved[0].scale(int(c1[0])))
            h = sum((q.scale(int(c)) for q, c in zip(curved[1:], c2[1:])), curved[0].scale(int(c2[0])))
            if f.degree(1) > 0 and h.degree(1) > 0:
                r = resultant(f, h, 1)
                if r:
                    acc = r
                    break
    return acc


def _split_on(minors, h, seed, depth):
    stripped, on_h = [], [h]
    for f in minors:
        q, k = _strip_factor(f, h)
        stripped.append(q)
        if k == 0:
            on_h.append(f)
    if len(on_h) == 1:
        return None  # h divides everything: not a finite zero set
    parts = [_first_candidates(on_h, seed, depth + 1), _first_candidates(stripped, seed, depth + 1)]
    if any(p is None for p in parts):
        return None
    return parts[0] * parts[1]


def _isolated_points(polys, tf: TransferFunction, tol: float, seed: int):
    first = _first_candidates(polys, seed)
    points = []
    if first is not None and not first.is_constant():
        for alpha in univariate_roots(first, 0):
            points.extend(_solve_second(polys, alpha, tf, tol))
    return _dedupe(points), first


def _spectrum_2d(tf: TransferFunction, tol: float, seed: int) -> GeometricSpectrum:
    dn = tf.shape[1]
    minors = [f for f in symbolic_minors(tf.psi_poly, dn) if f]
    if not minors:
        return GeometricSpectrum("positive_dimensional", "exact", components=[LaurentPolynomial.zero(2)], tol=tol)
    g = gcd_many(minors)
    if not g.is_constant():
        # V(minors) = V(g) u V(minors / g); the quotients are coprime
        pts, _ = _isolated_points([f.exquo(g) for f in minors], tf, tol, seed)
        off_curve = [p for p in pts if abs(poly_eval(g, [1 / w for w in p.omega])) > 1e-8 * _size(g)]
        return GeometricSpectrum("positive_dimensional", "exact", points=off_curve, components=[g], tol=tol,
                                 info={"minors": len(minors)})
    points, first = _isolated_points(minors, tf, tol, seed)
    return GeometricSpectrum("finite", "exact", points=points, tol=tol,
                             info={"minors": len(minors), "eliminant_degree": first.degree(0) if first else 0})


def _spectrum_1d(tf: TransferFunction, tol: float) -> GeometricSpectrum:
    dn = tf.shape[1]
    minors = [f for f in symbolic_minors(tf.psi_poly, dn) if f]
    if not minors:
        return GeometricSpectrum("positive_dimensional", "exact", components=[LaurentPolynomial.zero(1)], tol=tol)
    g = gcd_many(minors)
    points = []
    if not g.is_constant():
        for r in univariate_roots(g, 0):
            kd = _kernel_dim(tf, (r.value,), tol)
            if kd >= 1:
                points.append(SpectrumPoint((1 / r.value,), kd, _exact_point((r.exact,))))
    return GeometricSpectrum("finite", "exact", points=_dedupe(points), tol=tol)


def _sigma_ratio(tf: TransferFunction, z: np.ndarray) -> np.ndarray:
    sv = _kernels.batch_singular_values(tf.evaluate_batch(z))
    smax = sv[:, 0]
    smin = sv[:, -1] if sv.shape[1] >= tf.shape[1] else np.zeros(len(z))
    return np.where(smax > 0, smin / np.where(smax > 0, smax, 1.0), 0.0)


def _spectrum_sampled(tf: TransferFunction, tol: float, seed: int, samples: int, refine: int) -> GeometricSpectrum:
    d = tf.framework.d
    rng = np.random.default_rng(seed)
    half = samples // 2
    phases = rng.uniform(0, 2 * np.pi, size=(samples, d))
    radii = np.ones((samples, d))
    # second half on polydisk shells with |z_i| in [1/3, 3]
    radii[half:] = np.exp(rng.uniform(-np.log(3), np.log(3), size=(samples - half, d)))
    z = radii * np.exp(1j * phases)
    ratio = np.concatenate([_sigma_ratio(tf, z[i:i + _BATCH]) for i in range(0, samples, _BATCH)])
    hits = z[ratio <= tol]

    cands = [np.ones(d, dtype=complex)]
    axis = [np.exp(2j * np.pi * float(a)) for a in rational_angles(4)]
    cands += [np.array(p) for p in itertools.product(axis, repeat=d)]
    cands += list(hits)

    def to_z(x):
        return np.exp(np.clip(x[:d], -4.0, 4.0) + 1j * x[d:])

    def objective(x):
        return float(_sigma_ratio(tf, to_z(x)[None, :])[0])

    for i in np.argsort(ratio)[:refine]:
        x0 = np.concatenate([np.log(np.abs(z[i])), np.angle(z[i])])
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        cands.append(to_z(res.x))

    points = []
    for c in cands:
        kd = tf.kernel_dim_at(c, tol)
        if kd >= 1:
            exact = tuple(GaussianRational(1) for _ in range(d)) if np.allclose(c, 1, atol=1e-14) else None
            points.append(SpectrumPoint(tuple(complex(1 / x) for x in c), kd, exact))
    off_one = ratio[np.any(np.abs(z - 1) > 1e-3, axis=1)]
    info = {
        "samples": samples,
        "seed": seed,
        "sample_hits": int(np.sum(ratio <= tol)),
        "min_sigma_ratio": float(off_one.min()) if off_one.size else float("nan"),
        "refined": int(min(refine, samples)),
    }
    return GeometricSpectrum("probabilistic", "sampled", points=_dedupe(points), tol=tol, info=info)


def geometric_spectrum(
    fw: CrystalFramework,
    tol: float = DEFAULT_RANK_TOL,
    seed: int = 0,
    samples: int = 10_000,
    refine: int = 16,
) -> GeometricSpectrum:
    """The set of omega in (C\\{0})^d where Psi(omega^{-1}) drops rank.

    d <= 2 is solved exactly (GCD of maximal minors, then resultant
    elimination with numeric certification of each candidate); d >= 3 uses
    seeded sampling on the torus and polydisk shells with local refinement.
    """
    require_valid(fw)
    tf = transfer_function(fw)
    m, dn = tf.shape
    if m < dn:
        return GeometricSpectrum("positive_dimensional", "exact",
                                 components=[LaurentPolynomial.zero(fw.d)], tol=tol,
                                 info={"reason": "underdetermined: m < dn"})
    if fw.d == 1:
        return _spectrum_1d(tf, tol)
    if fw.d == 2:
        return _spectrum_2d(tf, tol, seed)
    return _spectrum_sampled(tf, tol, seed, samples, refine)


def is_spectrum_finite(gs: GeometricSpectrum) -> str:
    if gs.kind == "finite":
        return "finite"
    if gs.kind == "positive_dimensional" and any(not g.is_unit() for g in gs.components):
        return "infinite"
    return "unknown"
