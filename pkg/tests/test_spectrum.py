import numpy as np
import pytest
from hypothesis import given, settings

from crystalflex.algebra import LaurentPolynomial, monomial_normalize, poly_eval, symbolic_minors
from crystalflex.framework import CrystalFramework, EdgeDecl, Joint, gallery
from crystalflex.spectrum import (
    geometric_spectrum,
    is_spectrum_finite,
    rational_angles,
    rum_rational_scan,
    rum_samples_to_csv,
    rum_scan,
)
from crystalflex.transfer import transfer_function

from conftest import frameworks

Z1 = LaurentPolynomial.variable(0, 2)
Z2 = LaurentPolynomial.variable(1, 2)
ONE = LaurentPolynomial.constant(1, 2)


def unit_equal(p, q):
    return monomial_normalize(p)[0].monic() == monomial_normalize(q)[0].monic()


def point_set(gs, digits=9):
    return {tuple(complex(round(w.real, digits), round(w.imag, digits)) for w in p.omega) for p in gs.points}


@pytest.fixture
def off_torus():
    # finite spectrum {(1,1), (2,1)}: a flex growing like 2^{k1}
    return CrystalFramework(
        2,
        ((1, 0), (0, 1)),
        (Joint("a", (0, 0)), Joint("b", (-1, 0))),
        (
            EdgeDecl("b", (1, -1), "b", (0, 0)),
            EdgeDecl("a", (1, 0), "a", (0, 0)),
            EdgeDecl("a", (-1, -1), "b", (0, 0)),
            EdgeDecl("a", (0, 1), "b", (0, 0)),
            EdgeDecl("a", (0, -1), "a", (0, 0)),
        ),
    )


class TestRumScan:
    def test_grid_lines(self, grid):
        samples = rum_scan(grid, 8)
        assert len(samples) == 15
        for s in samples:
            assert abs(s.omega[0] - 1) < 1e-12 or abs(s.omega[1] - 1) < 1e-12
            assert s.kernel_dim == 2 - s.rank

    def test_diag_grid_order_two(self, diag_grid):
        samples = rum_scan(diag_grid, 2)
        assert {s.omega for s in samples} == {(1, 1), (-1, 1)}

    def test_translations_at_one(self, fixture_fw):
        first = rum_scan(fixture_fw, 1)
        assert len(first) == 1 and first[0].kernel_dim >= fixture_fw.d

    def test_row_major_order(self, grid):
        samples = rum_scan(grid, 4)
        angles = [tuple(np.angle(w) % (2 * np.pi) for w in s.omega) for s in samples]
        assert angles == sorted(angles)

    def test_grid_n_checked(self, grid):
        with pytest.raises(ValueError):
            rum_scan(grid, 0)

    def test_csv_deterministic(self, kagome):
        a = rum_samples_to_csv(rum_scan(kagome, 12), 2)
        b = rum_samples_to_csv(rum_scan(kagome, 12), 2)
        assert a == b
        header, first = a.splitlines()[:2]
        assert header == "omega_1_re,omega_1_im,omega_2_re,omega_2_im,rank,kernel_dim"
        assert first.split(",")[:4] == ["1", "0", "1", "0"]

    def test_csv_precision(self, kagome):
        text = rum_samples_to_csv(rum_scan(kagome, 7), 2)
        row = text.splitlines()[2].split(",")
        assert [float(x) for x in row[:4]] == [float(format(float(x), ".17g")) for x in row[:4]]

    @pytest.mark.parametrize("name, n", [("kagome_rational", 16), ("diag_grid", 6)])
    def test_minors_vanish_at_drops(self, name, n):
        fw = gallery(name)
        tf = transfer_function(fw)
        minors = [mm for mm in symbolic_minors(tf.psi_poly, tf.shape[1]) if mm]
        for s in rum_scan(fw, n):
            z = [1 / w for w in s.omega]
            for mm in minors:
                scale = sum(abs(complex(c)) for c in mm.terms.values())
                assert abs(poly_eval(mm, z)) <= 1e-8 * scale


class TestRationalScan:
    def test_angles(self):
        assert [str(a) for a in rational_angles(3)] == ["0", "1/3", "1/2", "2/3"]

    def test_diag_grid(self, diag_grid):
        assert {s.omega for s in rum_rational_scan(diag_grid, 2)} == {(1, 1), (-1, 1)}

    def test_grid_order_one(self, grid):
        (s,) = rum_rational_scan(grid, 1)
        assert s.omega == (1, 1) and s.kernel_dim == 2

    def test_doubled3d(self, doubled3d):
        (s,) = rum_rational_scan(doubled3d, 3)
        assert s.omega == (1, 1, 1) and s.kernel_dim == 5


class TestGeometricSpectrum:
    def test_grid_component(self, grid):
        gs = geometric_spectrum(grid)
        assert gs.kind == "positive_dimensional" and gs.certification == "exact"
        (g,) = gs.components
        assert unit_equal(g, (ONE - Z1) * (ONE - Z2))
        (w,) = gs.omega_components()
        assert unit_equal(w, (ONE - Z1) * (ONE - Z2))
        assert is_spectrum_finite(gs) == "infinite"

    def test_kagome_component(self, kagome):
        (g,) = geometric_spectrum(kagome).components
        assert unit_equal(g, (ONE - Z1) * (ONE - Z2) * (Z1 - Z2))

    def test_diag_grid(self, diag_grid):
        gs = geometric_spectrum(diag_grid)
        assert gs.kind == "finite" and gs.certification == "exact"
        assert {(p.omega, p.kernel_dim) for p in gs.points} == {((1, 1), 2), ((-1, 1), 1)}
        assert all(p.exact is not None for p in gs.points)
        assert is_spectrum_finite(gs) == "finite"
        assert [p.omega for p in gs.nontrivial_points()] == [(-1, 1)]

    def test_doubled3d(self, doubled3d):
        gs = geometric_spectrum(doubled3d, samples=2000)
        assert gs.kind == "probabilistic" and gs.certification == "sampled"
        assert point_set(gs) == {(1, 1, 1)}
        assert gs.points[0].kernel_dim == 5
        assert is_spectrum_finite(gs) == "unknown"

    def test_seed_determinism(self, doubled3d):
        a = geometric_spectrum(doubled3d, seed=5, samples=500, refine=4)
        b = geometric_spectrum(doubled3d, seed=5, samples=500, refine=4)
        assert point_set(a) == point_set(b) and a.info == b.info

    def test_underdetermined(self):
        fw = CrystalFramework(2, ((1, 0), (0, 1)), (Joint("v", (0, 0)),), (EdgeDecl("v", (0, 0), "v", (1, 0)),))
        gs = geometric_spectrum(fw)
        assert gs.kind == "positive_dimensional"
        assert gs.components[0].is_zero()
        assert is_spectrum_finite(gs) == "infinite"

    def test_one_dimensional(self):
        fw = CrystalFramework(
            1, ((1,),), (Joint("a", (0,)), Joint("b", ("1/3",))),
            (EdgeDecl("a", (0,), "b", (0,)), EdgeDecl("b", (0,), "a", (1,))),
        )
        gs = geometric_spectrum(fw)
        assert gs.kind == "finite"
        assert point_set(gs) == {(1,)}

    def test_inversion_applied_once(self, off_torus):
        gs = geometric_spectrum(off_torus)
        assert gs.kind == "finite"
        assert point_set(gs) == {(1, 1), (2, 1)}
        tf = transfer_function(off_torus)
        assert tf.kernel_dim_at((0.5, 1)) == 1
        assert tf.kernel_dim_at((2, 1)) == 0

    @settings(max_examples=25)
    @given(frameworks(d=2, max_joints=2, max_edges=6))
    def test_certified_points(self, fw):
        gs = geometric_spectrum(fw)
        tf = transfer_function(fw)
        if gs.kind == "finite":
            assert any(p.is_one() for p in gs.points)
            for p in gs.points:
                assert p.kernel_dim >= 1
                assert tf.kernel_dim_at([1 / w for w in p.omega]) == p.kernel_dim
        else:
            # translations: 1 lies on some component
            assert any(g.is_zero() or abs(poly_eval(g, (1, 1))) < 1e-12 for g in gs.components)

    @settings(max_examples=15)
    @given(frameworks(d=2, max_joints=2, max_edges=6))
    def test_torus_agreement(self, fw):
        # every drop found on a rational grid is explained by the exact spectrum
        gs = geometric_spectrum(fw)
        drops = rum_rational_scan(fw, 4)
        if gs.kind == "finite":
            pts = point_set(gs, 6)
            for s in drops:
                assert tuple(complex(round(w.real, 6), round(w.imag, 6)) for w in s.omega) in pts
        else:
            pts = point_set(gs, 6)
            for s in drops:
                z = [1 / w for w in s.omega]
                on_curve = any(g.is_zero() or abs(poly_eval(g, z)) < 1e-8 for g in gs.components)
                assert on_curve or tuple(complex(round(w.real, 6), round(w.imag, 6)) for w in s.omega) in pts

    def test_isolated_point_beside_curve(self):
        # two coincident joints: the line omega_1 = 1 plus the point (-1, 1)
        fw = CrystalFramework(
            2, ((1, 0), (0, 1)), (Joint("j0", (0, 0)), Joint("j1", (0, 0))),
            (
                EdgeDecl("j0", (0, 0), "j0", (1, 0)),
                EdgeDecl("j0", (0, 0), "j0", (0, 1)),
                EdgeDecl("j0", (1, 0), "j0", (-1, 1)),
                EdgeDecl("j0", (0, 0), "j1", (0, 1)),
                EdgeDecl("j1", (0, 0), "j1", (1, 0)),
            ),
        )
        gs = geometric_spectrum(fw)
        assert gs.kind == "positive_dimensional"
        (g,) = gs.components
        assert unit_equal(g, ONE - Z1)
        assert point_set(gs) == {(-1, 1)}
        assert gs.points[0].kernel_dim == 1
