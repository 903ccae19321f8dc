from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from crystalflex.algebra import LaurentPolynomial
from crystalflex.framework import CrystalFramework, EdgeDecl, Joint, gallery, validate

settings.register_profile(
    "default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=4)
gaussian_coeff = st.tuples(small_fraction, small_fraction)


@st.composite
def laurent_polys(draw, d: int = 2, max_terms: int = 4, max_exp: int = 2):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        exp = tuple(draw(st.integers(-max_exp, max_exp)) for _ in range(d))
        re, im = draw(gaussian_coeff)
        terms[exp] = (re, im)
    from crystalflex.algebra import GaussianRational

    return LaurentPolynomial({e: GaussianRational(re, im) for e, (re, im) in terms.items()}, d)


@st.composite
def frameworks(draw, d: int | None = None, max_joints: int = 3, max_edges: int = 7):
    """Random valid crystal frameworks with small rational geometry."""
    d = d if d is not None else draw(st.sampled_from([1, 2, 2, 3]))
    coord = st.fractions(min_value=-2, max_value=2, max_denominator=3)
    periods = tuple(tuple(draw(st.integers(-2, 2)) for _ in range(d)) for _ in range(d))
    n = draw(st.integers(1, max_joints))
    joints = tuple(Joint(f"j{i}", tuple(draw(coord) for _ in range(d))) for i in range(n))
    m = draw(st.integers(1, max_edges))
    offs = st.tuples(*[st.integers(-1, 1)] * d)
    edges = tuple(
        EdgeDecl(f"j{draw(st.integers(0, n - 1))}", draw(offs), f"j{draw(st.integers(0, n - 1))}", draw(offs))
        for _ in range(m)
    )
    fw = CrystalFramework(d, periods, joints, edges)
    if not validate(fw).ok:
        # dependent periods are the usual culprit
        fw = CrystalFramework(d, tuple(tuple(int(i == j) for j in range(d)) for i in range(d)), joints, edges)
    assume(validate(fw).ok)
    return fw


FIXTURES = ("grid", "diag_grid", "kagome_rational", "doubled3d")


@pytest.fixture(params=FIXTURES)
def fixture_fw(request):
    return gallery(request.param)


@pytest.fixture
def grid():
    return gallery("grid")


@pytest.fixture
def diag_grid():
    return gallery("diag_grid")


@pytest.fixture
def kagome():
    return gallery("kagome_rational")


@pytest.fixture
def doubled3d():
    return gallery("doubled3d")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
