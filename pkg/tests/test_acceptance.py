"""Acceptance criteria 1-7.

Each criterion is one test; a PASS/FAIL line per criterion is printed in the
pytest terminal summary (and on stdout when run as a script:
``python tests/test_acceptance.py``).
"""
import functools
import sys
import time
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from conftest import frameworks, laurent_polys  # noqa: E402
from crystalflex.algebra import LaurentPolynomial, monomial_normalize, numeric_rank, poly_eval, symbolic_minors  # noqa: E402
from crystalflex.flexes import (  # noqa: E402
    check_flex_window,
    difference_reduce,
    factor_periodic_flexes,
    flex_space_dimension,
    pg_flex_space,
    rigidity_verdict,
)
from crystalflex.framework import CrystalFramework, gallery  # noqa: E402
from crystalflex.io import parse_framework, serialize_framework  # noqa: E402
from crystalflex.spectrum import geometric_spectrum, rum_scan  # noqa: E402
from crystalflex.transfer import (  # noqa: E402
    periodic_rigidity_matrix,
    rank_thresholds,
    supercell_rank_identity,
    transfer_function,
)

RESULTS: dict[int, str] = {}

Z1 = LaurentPolynomial.variable(0, 2)
Z2 = LaurentPolynomial.variable(1, 2)
ONE = LaurentPolynomial.constant(1, 2)


def _unit_normal(p):
    return monomial_normalize(p)[0].monic() if p else p


def criterion(number, title, limit):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            try:
                fn()
                elapsed = time.perf_counter() - t0
                assert elapsed < limit, f"runtime {elapsed:.2f}s over the {limit}s limit"
            except AssertionError as exc:
                elapsed = time.perf_counter() - t0
                reason = str(exc).splitlines()[0] if str(exc) else "assertion failed"
                RESULTS[number] = f"FAIL criterion {number} ({title}) {elapsed:.2f}s: {reason}"
                raise
            RESULTS[number] = f"PASS criterion {number} ({title}) {elapsed:.2f}s"

        return run

    return wrap


@criterion(1, "diagonal grid", 1.0)
def test_criterion_1_diag_grid():
    fw = gallery("diag_grid")
    gs = geometric_spectrum(fw)
    assert gs.certification == "exact" and gs.kind == "finite"
    assert {p.omega for p in gs.points} == {(1, 1), (-1, 1)}, gs.points
    fd = flex_space_dimension(fw, spectrum=gs)
    assert (fd.kind, fd.dim) == ("finite", 4), (fd.kind, fd.dim)
    flexes = factor_periodic_flexes(fw, (-1, 1))
    assert len(flexes) == 1
    assert check_flex_window(fw, flexes[0].centered_window(5), tol=1e-8)


@criterion(2, "grid", 1.0)
def test_criterion_2_grid():
    fw = gallery("grid")
    tf = transfer_function(fw)
    rows = [[_unit_normal(p) for p in row] for row in tf.psi.entries]
    zero = LaurentPolynomial.zero(2)
    assert rows == [[(ONE - Z1).monic(), zero], [zero, (ONE - Z2).monic()]]
    gs = geometric_spectrum(fw)
    assert gs.kind == "positive_dimensional"
    (g,) = gs.components
    assert _unit_normal(g) == ((ONE - Z1) * (ONE - Z2)).monic()
    v = rigidity_verdict(fw, spectrum=gs)
    assert v.first_order_rigid == "flexible"
    assert v.witness is not None and check_flex_window(fw, v.witness.centered_window(5))


@criterion(3, "kagome RUM lines", 10.0)
def test_criterion_3_kagome():
    fw = gallery("kagome_rational")
    n = 64
    samples = rum_scan(fw, n)
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    on_lines = {
        (a, b)
        for i, a in enumerate(roots)
        for j, b in enumerate(roots)
        if i == 0 or j == 0 or i == j
    }
    found = {s.omega for s in samples}

    def key(om):
        return tuple(int(round((np.angle(w) / (2 * np.pi)) * n)) % n for w in om)

    assert {key(o) for o in found} == {key(o) for o in on_lines}
    assert len(found) == 3 * n - 2
    tf = transfer_function(fw)
    minors = [mm for mm in symbolic_minors(tf.psi_poly, tf.shape[1]) if mm]
    for s in samples:
        assert s.kernel_dim >= 1
        z = [1 / w for w in s.omega]
        for mm in minors:
            scale = sum(abs(complex(c)) for c in mm.terms.values())
            assert abs(poly_eval(mm, z)) <= 1e-8 * scale
    assert rigidity_verdict(fw).first_order_rigid == "flexible"


@criterion(4, "doubled 3D", 30.0)
def test_criterion_4_doubled3d():
    fw = gallery("doubled3d")
    _, ker = numeric_rank(periodic_rigidity_matrix(fw))
    assert ker.shape[1] == 5
    gs = geometric_spectrum(fw, seed=0, samples=10_000)
    assert gs.certification == "sampled"
    assert [p.omega for p in gs.points] == [(1, 1, 1)] and not gs.components
    v = rigidity_verdict(fw, spectrum=gs)
    assert v.first_order_rigid == "flexible"
    assert "periodic_kernel_is_translations" in v.failed and not v.periodic_kernel_is_translations
    fd = flex_space_dimension(fw, spectrum=gs)
    assert fd.dim == 8, f"flex_space_dimension = {fd.dim}, expected 8 (per-point dims {fd.per_point[0][1]})"


@criterion(5, "supercell rank identity", 5.0)
def test_criterion_5_supercell():
    for name in ("grid", "diag_grid", "kagome_rational"):
        fw = gallery(name)
        for reps in ((1, 1), (2, 1), (2, 2), (3, 2)):
            res = supercell_rank_identity(fw, reps)
            assert isinstance(res.lhs, int) and isinstance(res.rhs, int)
            assert res.lhs == res.rhs, (name, reps, res.lhs, res.rhs)


def _points(d, seed, count=8):
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(-0.7, 0.7, (count, d))) * np.exp(2j * np.pi * rng.uniform(size=(count, d)))


@settings(max_examples=50)
@given(frameworks())
def _prop_translations(fw):
    r = periodic_rigidity_matrix(fw)
    assert numeric_rank(r)[0] <= fw.d * fw.n - fw.d
    for t in range(fw.d):
        assert np.allclose(r @ np.tile(np.eye(fw.d)[t], fw.n), 0)


@settings(max_examples=25)
@given(frameworks(), st.data())
def _prop_invariance(fw, data):
    d = fw.d
    pts = _points(d, data.draw(st.integers(0, 1000)))
    base = list(transfer_function(fw).ranks_batch(pts))
    shifts = [data.draw(st.tuples(*[st.integers(-2, 2)] * d)) for _ in fw.edges]
    moved = CrystalFramework(d, fw.periods, fw.joints, tuple(e.translated(s) for e, s in zip(fw.edges, shifts)))
    assert list(transfer_function(moved).ranks_batch(pts)) == base
    t = [[data.draw(st.integers(-2, 2)) + (5 if i == j else 0) for j in range(d)] for i in range(d)]
    assert list(transfer_function(fw.linear_image(t)).ranks_batch(pts)) == base


@settings(max_examples=25)
@given(frameworks(max_joints=2, max_edges=5), st.integers(0, 10_000))
def _prop_pg(fw, seed):
    d = fw.d
    rng = np.random.default_rng(seed)
    omega = tuple(rng.choice([1, -1, 1j], size=d))
    top = 3 if d < 3 else 2
    dims = [len(pg_flex_space(fw, omega, deg)) for deg in range(top + 1)]
    assert dims == sorted(dims)
    basis = pg_flex_space(fw, omega, top - 1)
    if not basis:
        return
    c = rng.normal(size=len(basis))
    f = type(basis[0])(basis[0].omega, basis[0].exponents, sum(ci * b.coeffs for ci, b in zip(c, basis)))
    window = ((-3,) * d, (3,) * d)
    for j in range(d):
        if f.degree_in(j) >= 1:
            g = difference_reduce(f, j)
            assert g.multidegree() < f.multidegree()
            assert check_flex_window(fw, g.window(*window))


@settings(max_examples=50)
@given(laurent_polys(), laurent_polys(), laurent_polys(), st.integers(0, 10_000))
def _prop_laurent(p, q, r, seed):
    assert (p + q) * r == p * r + q * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    z = _points(2, seed, 1)[0]
    for lhs, rhs in (
        (poly_eval(p * q, z), poly_eval(p, z) * poly_eval(q, z)),
        (poly_eval(p + q, z), poly_eval(p, z) + poly_eval(q, z)),
    ):
        bound = 1e-10 * max(1.0, abs(rhs), abs(poly_eval(p, z)) * abs(poly_eval(q, z)))
        assert abs(lhs - rhs) <= bound


@criterion(6, "property suites", 600.0)
def test_criterion_6_properties():
    _prop_translations()
    _prop_invariance()
    _prop_pg()
    _prop_laurent()


@criterion(7, "rank-extremality thresholds", 5.0)
def test_criterion_7_thresholds():
    from crystalflex.framework import GALLERY_NAMES

    for name in GALLERY_NAMES:
        fw = parse_framework(serialize_framework(gallery(name)))
        d, n = fw.d, fw.n
        th = rank_thresholds(fw)
        assert (th.at_one, th.generic, th.fper) == (d * n - d, d * n, d * n + d * (d - 1) // 2), name
        assert transfer_function(fw).thresholds == th


if __name__ == "__main__":
    failed = 0
    for fn in (test_criterion_1_diag_grid, test_criterion_2_grid, test_criterion_3_kagome,
               test_criterion_4_doubled3d, test_criterion_5_supercell, test_criterion_6_properties,
               test_criterion_7_thresholds):
        try:
            fn()
        except AssertionError:
            failed += 1
    for k in sorted(RESULTS):
        print(RESULTS[k])
    sys.exit(1 if failed else 0)
