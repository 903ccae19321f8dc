"""Hot numeric loops, with numba and pure-numpy implementations.

Set ``CRYSTALFLEX_DISABLE_NUMBA=1`` to force the numpy path (numba is also
skipped automatically when it cannot be imported).  Both paths are always
importable as ``*_numba`` / ``*_numpy`` so they can be cross-checked and
benchmarked against each other.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("CRYSTALFLEX_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")


def eval_terms_numpy(z, rows, cols, coef, exps, shape):
    """Evaluate a sparse Laurent matrix at a batch of points.

    ``z`` is ``(S, d)`` complex; term ``t`` contributes
    ``coef[t] * prod(z ** exps[t])`` to entry ``(rows[t], cols[t])``.
    Returns ``(S, m, c)`` complex.
    """
    z = np.asarray(z, dtype=np.complex128)
    m, c = shape
    if coef.size == 0:
        return np.zeros((z.shape[0], m, c), dtype=np.complex128)
    mono = np.prod(z[:, None, :] ** exps[None, :, :], axis=2) * coef[None, :]
    scatter = np.zeros((coef.size, m * c))
    scatter[np.arange(coef.size), rows * c + cols] = 1.0
    return (mono @ scatter).reshape(z.shape[0], m, c)


def edge_residuals_numpy(values, ev, ek, ew, el, pe, dof):
    """Bar-length rates ``p(e).(u_v(k+k0) - u_w(k+l0))`` over a window.

    ``values`` is ``(*extent, n*dof)``; returns ``(m, ncells)`` with NaN
    where an endpoint falls outside the window (cells in C order).
    """
    extent = np.array(values.shape[:-1])
    ncell = int(np.prod(extent))
    flat = values.reshape(ncell, -1)
    cells = np.array(np.unravel_index(np.arange(ncell), tuple(extent))).T
    out = np.full((len(ev), ncell), np.nan + 0j)
    for e in range(len(ev)):
        a = cells + ek[e]
        b = cells + el[e]
        inside = np.all((a >= 0) & (a < extent) & (b >= 0) & (b < extent), axis=1)
        ia = np.ravel_multi_index(tuple(a[inside].T), tuple(extent))
        ib = np.ravel_multi_index(tuple(b[inside].T), tuple(extent))
        ua = flat[ia, ev[e] * dof:(ev[e] + 1) * dof]
        ub = flat[ib, ew[e] * dof:(ew[e] + 1) * dof]
        out[e, inside] = (ua - ub) @ pe[e]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _eval_terms_jit(z, rows, cols, coef, exps, m, c):
        s_count, d = z.shape
        out = np.zeros((s_count, m, c), dtype=np.complex128)
        for s in range(s_count):
            for t in range(coef.shape[0]):
                val = coef[t]
                for i in range(d):
                    e = exps[t, i]
                    if e > 0:
                        for _ in range(e):
                            val *= z[s, i]
                    elif e < 0:
                        inv = 1.0 / z[s, i]
                        for _ in range(-e):
                            val *= inv
                out[s, rows[t], cols[t]] += val
        return out

    @njit(cache=True)
    def _edge_residuals_jit(flat, extent, ev, ek, ew, el, pe, dof):
        d = extent.shape[0]
        ncell = flat.shape[0]
        m = ev.shape[0]
        out = np.empty((m, ncell), dtype=np.complex128)
        idx = np.empty(d, dtype=np.int64)
        for cell in range(ncell):
            rem = cell
            for i in range(d - 1, -1, -1):
                idx[i] = rem % extent[i]
                rem //= extent[i]
            for e in range(m):
                ia = 0
                ib = 0
                ok = True
                for i in range(d):
                    a = idx[i] + ek[e, i]
                    b = idx[i] + el[e, i]
                    if a < 0 or a >= extent[i] or b < 0 or b >= extent[i]:
                        ok = False
                        break
                    ia = ia * extent[i] + a
                    ib = ib * extent[i] + b
                if not ok:
                    out[e, cell] = np.nan + 0j
                    continue
                acc = 0j
                for t in range(dof):
                    acc += pe[e, t] * (flat[ia, ev[e] * dof + t] - flat[ib, ew[e] * dof + t])
                out[e, cell] = acc
        return out

    def eval_terms_numba(z, rows, cols, coef, exps, shape):
        z = np.ascontiguousarray(z, dtype=np.complex128)
        return _eval_terms_jit(z, rows, cols, coef, exps, shape[0], shape[1])

    def edge_residuals_numba(values, ev, ek, ew, el, pe, dof):
        extent = np.array(values.shape[:-1], dtype=np.int64)
        flat = np.ascontiguousarray(values.reshape(int(np.prod(extent)), -1), dtype=np.complex128)
        return _edge_residuals_jit(flat, extent, ev, ek, ew, el, pe, dof)

else:  # pragma: no cover
    eval_terms_numba = eval_terms_numpy
    edge_residuals_numba = edge_residuals_numpy


if USE_NUMBA:
    eval_terms = eval_terms_numba
    edge_residuals = edge_residuals_numba
else:
    eval_terms = eval_terms_numpy
    edge_residuals = edge_residuals_numpy


def batch_singular_values(mats: np.ndarray) -> np.ndarray:
    """Singular values of a stack ``(S, r, c)``, descending per matrix."""
    if mats.shape[0] == 0:
        return np.zeros((0, min(mats.shape[1:])))
    return np.linalg.svd(mats, compute_uv=False)


def batch_ranks(mats: np.ndarray, tol: float, scales: np.ndarray | None = None) -> np.ndarray:
    """Numeric ranks of a stack, with the same cut-off as ``numeric_rank``."""
    from .algebra.linalg import rank_threshold

    sv = batch_singular_values(mats)
    smax = sv[:, :1] if sv.shape[1] else np.zeros((sv.shape[0], 1))
    thr = rank_threshold(smax, tol, None if scales is None else np.asarray(scales)[:, None])
    return np.where(smax[:, 0] == 0, 0, np.sum(sv > thr, axis=1)).astype(int)
