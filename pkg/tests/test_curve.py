"""Curve arcs: evaluation, certified constants, inversion, parsing."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diophcurve.curve import (Curve, CurveError, catalog, chord_diameter,
                              invert_on_interval, parse_curve,
                              verify_nondegeneracy)


@pytest.fixture(scope="module")
def curves():
    return catalog()


def test_catalog_contents(curves):
    assert set(curves) >= {"parabola", "circle-arc", "hyperbola", "cubic"}
    for cur in curves.values():
        assert cur.a < cur.b
        assert 0 < cur.c2 <= cur.c1


def test_catalog_passes_nondegeneracy(curves):
    for cur in curves.values():
        rep = verify_nondegeneracy(cur)
        assert rep.ok, (cur.name, rep.messages)
        assert rep.min_slope > 0
        assert rep.f2_sign_constant


def test_slope_bounds_hold_on_grid(curves):
    for cur in curves.values():
        xs = np.linspace(cur.a, cur.b, 257)
        ds = [cur.df(float(x)) for x in xs]
        assert min(ds) >= cur.c2
        assert max(ds) <= cur.c1


def test_arcs_increasing(curves):
    for cur in curves.values():
        assert cur.f(cur.b) > cur.f(cur.a)


def test_poly_exactness(curves):
    par = curves["parabola"]
    assert par.exact
    assert par.f_frac(Fraction(1, 3)) == Fraction(1, 9)
    cub = curves["cubic"]
    assert cub.f_frac(Fraction(1, 2)) == Fraction(1, 2) + Fraction(1, 8)
    assert not curves["circle-arc"].exact
    with pytest.raises(CurveError):
        curves["circle-arc"].f_frac(Fraction(1, 2))


@given(num=st.integers(0, 1000))
@settings(max_examples=50)
def test_f_frac_matches_float(num):
    par = catalog()["parabola"]
    x = Fraction(num, 1000)
    assert float(par.f_frac(x)) == pytest.approx(par.f(num / 1000), abs=1e-12)


def test_f_array_matches_scalar(curves):
    for cur in curves.values():
        xs = np.linspace(cur.a, cur.b, 13)
        arr = cur.f_array(xs)
        for i, x in enumerate(xs):
            assert arr[i] == pytest.approx(cur.f(float(x)), rel=1e-15)


def test_d2_sign(curves):
    assert curves["parabola"].d2_sign() == 1
    assert curves["circle-arc"].d2_sign() == 1
    assert curves["hyperbola"].d2_sign() == -1
    for cur in curves.values():
        assert abs(cur.d2f(0.5 * (cur.a + cur.b))) <= cur.d2_max_abs() * (1 + 1e-12)


def test_kernel_params_shape(curves):
    for cur in curves.values():
        kind, coeffs, dcoeffs, a, b, c1, c2 = cur.kernel_params()
        assert isinstance(kind, int)
        assert coeffs.dtype == np.float64
        assert (a, b, c1, c2) == (cur.a, cur.b, cur.c1, cur.c2)


# --- inversion -----------------------------------------------------------------

@given(frac=st.floats(0.0, 1.0))
@settings(max_examples=40)
def test_invert_roundtrip(frac):
    for name in ("parabola", "circle-arc", "hyperbola", "cubic"):
        cur = catalog()[name]
        fa, fb = cur.f(cur.a), cur.f(cur.b)
        y = fa + frac * (fb - fa)
        got = invert_on_interval(cur, y - 1e-9, y + 1e-9)
        assert got is not None
        x_lo, x_hi = got
        assert cur.a <= x_lo <= x_hi <= cur.b
        mid = 0.5 * (x_lo + x_hi)
        assert cur.f(mid) == pytest.approx(y, abs=1e-8)


def test_invert_disjoint_ranges(curves):
    cur = curves["parabola"]
    fb = cur.f(cur.b)
    assert invert_on_interval(cur, fb + 0.5, fb + 1.0) is None
    out = invert_on_interval(cur, -10.0, 10.0)
    assert out == pytest.approx((cur.a, cur.b))
    with pytest.raises(CurveError):
        invert_on_interval(cur, 1.0, 0.5)


def test_chord_diameter(curves):
    cur = curves["parabola"]
    k1 = math.sqrt(1 + cur.c1 ** 2)
    assert chord_diameter(cur, (0.2, 0.5)) == pytest.approx(0.3 * k1)
    assert chord_diameter(cur, None) == 0.0
    assert chord_diameter(cur, (0.5, 0.5)) == 0.0
    assert cur.chord_diameter(0.2, 0.5) == chord_diameter(cur, (0.2, 0.5))


def test_chord_diameter_dominates_arc(curves):
    # the certified bound must dominate the true euclidean diameter
    for cur in curves.values():
        x0, x1 = cur.a, cur.b
        true = math.hypot(x1 - x0, cur.f(x1) - cur.f(x0))
        assert chord_diameter(cur, (x0, x1)) >= true


# --- construction and parsing ----------------------------------------------------

def test_constructor_validation():
    with pytest.raises(CurveError):
        Curve("bad", "nosuch", (), 0.0, 1.0, 1.0, 0.5)
    with pytest.raises(CurveError):
        Curve("bad", "poly", (0, 0, 1), 1.0, 0.5, 1.0, 0.5)
    with pytest.raises(CurveError):
        Curve("bad", "poly", (0, 0, 1), 0.1, 1.0, 1.0, 0.0)
    with pytest.raises(CurveError):
        Curve("bad", "circle", (), 0.5, 1.5, 1.0, 0.5)
    with pytest.raises(CurveError):
        Curve("bad", "hyperbola", (), 0.5, 2.0, 1.0, 0.5)


def test_parse_catalog_names(curves):
    for name in curves:
        assert parse_curve(name).name == name


def test_parse_poly():
    cur = parse_curve("poly:0,0,1@[0.1,1]")
    assert cur.kind == "poly"
    assert cur.f(0.5) == pytest.approx(0.25)
    assert (cur.a, cur.b) == (0.1, 1.0)
    rep = verify_nondegeneracy(cur)
    assert rep.ok


def test_parse_poly_derives_safe_constants():
    cur = parse_curve("poly:0,1,1@[0.2,0.8]")  # f = x + x^2
    ds = [cur.df(x) for x in np.linspace(cur.a, cur.b, 101)]
    assert cur.c2 <= min(ds) and max(ds) <= cur.c1


def test_parse_errors():
    with pytest.raises(CurveError):
        parse_curve("nosuch")
    with pytest.raises(CurveError):
        parse_curve("poly:0,0,1")
    with pytest.raises(CurveError):
        parse_curve("poly:1@[0,1]")  # constant: slope floor fails
    with pytest.raises(CurveError):
        parse_curve("poly:0,1@[0.1,1]")  # line: f'' vanishes


def test_degenerate_grid_check():
    # decreasing slope arc fails the positive-slope certificate
    with pytest.raises(CurveError):
        parse_curve("poly:0,-1,1@[0.1,0.4]")
