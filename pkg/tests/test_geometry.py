"""Metric families, frames, null directions, and divergence."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nulltorus import catalog, geometry
from nulltorus.errors import DegenerateMetric
from nulltorus.gridtools import grid_points


def test_analex_coefficients_at_origin(analex_spec):
    """lambda_1 = 1 + sin(2 pi (x1-x2))/10 and lambda_2 = lambda_1 - 2."""
    ev = geometry.eval_metric(analex_spec, (0.0, 0.0))
    assert ev.A == pytest.approx(-1.0, abs=1e-14)
    assert ev.B == 0.0
    assert ev.C == pytest.approx(1.0, abs=1e-14)
    l1, l2 = analex_spec.lambdas(0.25, 0.0)
    assert l1 == pytest.approx(1.1, abs=1e-14)
    assert l2 == pytest.approx(-0.9, abs=1e-14)


def test_mean_coefficients_analex(analex_spec):
    l1, l2 = geometry.mean_coefficients(analex_spec)
    assert abs(l1 - 1.0) < 1e-12
    assert abs(l2 + 1.0) < 1e-12


def test_rosatau_conventions(rosatau_spec):
    # g = 2 dx1 dx2 - tau dx2^2: determinant -1 regardless of tau
    for x1 in (0.0, 0.2, 0.3, 0.44, 0.7):
        ev = geometry.eval_metric(rosatau_spec, (x1, 0.5))
        assert ev.det == pytest.approx(-1.0, abs=1e-14)
    assert rosatau_spec.tau_at(0.3) == pytest.approx(0.0, abs=1e-15)
    assert rosatau_spec.dtau_at(0.3) == pytest.approx(1.0, abs=1e-12)
    # tau vanishes identically outside the support window
    assert rosatau_spec.tau_at(0.6) == 0.0
    assert rosatau_spec.tau_at(0.05) == 0.0


def test_sanchez_null_fields(sanchez_spec):
    assert sanchez_spec.eta0 == -1
    for x1 in (0.0, 0.13, 0.37, 0.81):
        E, F, G, R = sanchez_spec.efgr(x1)
        assert E * G + F * F > 0.0
        assert R == pytest.approx(math.sqrt(E * G + F * F), abs=1e-14)
        (a1, b1), (a2, b2) = sanchez_spec.null_fields(x1)
        ev = geometry.eval_metric(sanchez_spec, (x1, 0.0))
        assert abs(ev.inner((a1, b1), (a1, b1))) < 1e-9 * max(1.0, a1 * a1)
        assert abs(ev.inner((a2, b2), (a2, b2))) < 1e-9


ZOO = ("flat_spec", "sqrt2_spec", "analex_spec", "sanchez_spec",
       "rosatau_spec", "wave12_spec", "conformal_spec")


@pytest.mark.parametrize("name", ZOO)
def test_frame_is_orthonormal(name, request, rng):
    spec = request.getfixturevalue(name)
    for _ in range(25):
        p = (float(rng.random()), float(rng.random()))
        ev = geometry.eval_metric(spec, p)
        fr = geometry.orthonormal_frame(spec, p)
        assert ev.inner(fr.s1, fr.s1) == pytest.approx(-1.0, abs=1e-11)
        assert ev.inner(fr.s2, fr.s2) == pytest.approx(1.0, abs=1e-11)
        assert abs(ev.inner(fr.s1, fr.s2)) < 1e-11


@pytest.mark.parametrize("name", ZOO)
def test_null_directions_are_null(name, request, rng):
    spec = request.getfixturevalue(name)
    for _ in range(10):
        p = (float(rng.random()), float(rng.random()))
        ev = geometry.eval_metric(spec, p)
        fr = geometry.orthonormal_frame(spec, p)
        X, Y = geometry.null_directions(spec, p)
        assert abs(ev.inner(X, X)) < 1e-10
        assert abs(ev.inner(Y, Y)) < 1e-10
        # X = s1 + s2 and Y = -s1 + s2 in the canonical frame
        np.testing.assert_allclose(X, fr.x_direction, atol=1e-12)
        np.testing.assert_allclose(Y, fr.y_direction, atol=1e-12)
        assert ev.inner(X, Y) == pytest.approx(2.0, abs=1e-10)


@given(x1=st.floats(0, 1, allow_nan=False), x2=st.floats(0, 1),
       u=st.floats(0.1, 3.0), v=st.floats(0.1, 3.0))
@settings(max_examples=60, deadline=None)
def test_left_invariant_frame_property(x1, x2, u, v):
    spec = geometry.LeftInvariant(u, v)
    ev = geometry.eval_metric(spec, (x1, x2))
    fr = geometry.orthonormal_frame(spec, (x1, x2))
    assert ev.inner(fr.s1, fr.s1) == pytest.approx(-1.0, rel=1e-12)
    assert ev.inner(fr.s2, fr.s2) == pytest.approx(1.0, rel=1e-12)


def test_exact_ratio_fractions():
    assert geometry.LeftInvariant(Fraction(3, 2), Fraction(1, 2)
                                  ).exact_ratio() == Fraction(3)
    assert geometry.LeftInvariant(2, 4).exact_ratio() == Fraction(1, 2)
    assert geometry.LeftInvariant(math.sqrt(2.0), 1.0).exact_ratio() is None


def test_closedness_residual(analex_spec, wave12_spec):
    assert geometry.closedness_residual(analex_spec) < 1e-12
    assert geometry.closedness_residual(wave12_spec) < 1e-12
    assert geometry.is_closed_diagonal(analex_spec)
    assert geometry.is_closed_diagonal(wave12_spec)
    # breaking the wave's amplitude coupling breaks closedness
    bad = geometry.ClosedDiagonal(
        lambda x1, x2: 1.0 + 0.1 * np.cos(2 * np.pi * (x1 + x2)),
        lambda x1, x2: 2.0 + 0.1 * np.cos(2 * np.pi * (x1 + x2)))
    assert geometry.closedness_residual(bad) > 1e-2


def test_validate_spec_rejects_degenerate():
    bad = geometry.Diagonal(lambda x1, x2: np.sin(2 * np.pi * x1),
                            lambda x1, x2: np.ones_like(np.asarray(x1)))
    with pytest.raises(DegenerateMetric):
        geometry.validate_spec(bad)


@pytest.mark.parametrize("name", ("analex_spec", "sanchez_spec",
                                  "rosatau_spec", "conformal_spec"))
def test_divergence_grid_matches_pointwise(name, request):
    spec = request.getfixturevalue(name)
    V = geometry.VectorField(
        lambda x1, x2: 0.4 + 0.2 * np.sin(2 * np.pi * x1),
        lambda x1, x2: -0.3 + 0.1 * np.cos(2 * np.pi * (x1 + x2)))
    n = 128
    X1, X2 = grid_points(n)
    v1, v2 = V.at(X1, X2)
    grid = geometry.divergence_grids(spec, v1, v2, n)
    for i, j in ((0, 0), (17, 3), (64, 100), (5, 90)):
        point = geometry.divergence(spec, V, (i / n, j / n))
        assert grid[i, j] == pytest.approx(point, abs=2e-5)


@pytest.mark.parametrize("name", ZOO)
def test_family_divergence_equals_connection_rate(name, request, rng):
    """div X = Gamma(X) and div Y = -Gamma(Y): the dual route used by the
    holonomy/obstruction bookkeeping."""
    spec = request.getfixturevalue(name)
    for _ in range(6):
        p = (float(rng.random()), float(rng.random()))
        for family, sign in (("X", 1.0), ("Y", -1.0)):
            d = geometry.null_direction_arrays(
                spec, np.asarray(p[0]), np.asarray(p[1]), family)
            V = geometry.VectorField(
                lambda x1, x2, fam=family: geometry.null_direction_arrays(
                    spec, x1, x2, fam)[0],
                lambda x1, x2, fam=family: geometry.null_direction_arrays(
                    spec, x1, x2, fam)[1])
            div = geometry.divergence(spec, V, p)
            gam = geometry.connection_along(spec, np.asarray(p[0]),
                                            np.asarray(p[1]),
                                            np.asarray(float(d[0])),
                                            np.asarray(float(d[1])))
            assert float(gam) * sign == pytest.approx(div, abs=5e-5)


def test_orientation_signs(flat_spec, rosatau_spec, analex_spec):
    assert geometry.orientation(flat_spec) == 1
    # analex has lambda_2 < 0, so its canonical frame reverses orientation,
    # as does the quasi-vertical convention of the pp-wave family
    assert geometry.orientation(analex_spec) == -1
    assert geometry.orientation(rosatau_spec) == -1
