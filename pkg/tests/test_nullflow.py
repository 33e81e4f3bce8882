"""Null line integration, rotation numbers, and cylinder decompositions."""

import math

import numpy as np
import pytest

from nulltorus import catalog, geometry, nullflow
from nulltorus.errors import DenseFlow


def test_flat_diagonal_line(flat_spec):
    rec = nullflow.integrate_null_line(flat_spec, (0.0, 0.0), "X", t_max=3.0)
    # lambda_1 = lambda_2 = 1: the X line is the diagonal x2 = x1
    np.testing.assert_allclose(rec.points[:, 1], rec.points[:, 0], atol=1e-12)
    rec_y = nullflow.integrate_null_line(flat_spec, (0.0, 0.0), "Y", t_max=3.0)
    np.testing.assert_allclose(rec_y.points[:, 1], -rec_y.points[:, 0],
                               atol=1e-12)


def test_slope_against_null_direction(analex_spec):
    """The recorded velocity must be proportional to the null direction."""
    rec = nullflow.integrate_null_line(analex_spec, (0.2, 0.7), "X",
                                       t_max=1.0)
    for idx in (0, 250, 999):
        p = rec.points[idx]
        v = rec.velocities[idx]
        d = geometry.null_direction_arrays(analex_spec,
                                           np.asarray(p[0] % 1.0),
                                           np.asarray(p[1] % 1.0), "X")
        cross = float(v[0]) * float(d[1]) - float(v[1]) * float(d[0])
        assert abs(cross) < 1e-8


def test_rotation_number_analex(analex_spec):
    est = nullflow.rotation_number(analex_spec, "X", n_returns=400)
    assert est.rational is not None
    assert (est.rational.p, est.rational.q) == (-1, 1)
    assert abs(est.value + 1.0) < 1e-9


def test_rotation_number_direct_matches_map(wave12_spec):
    fast = nullflow.rotation_number(wave12_spec, "X", n_returns=300)
    direct = nullflow.rotation_number(wave12_spec, "X", n_returns=60,
                                      method="direct")
    assert abs(fast.value - direct.value) < 1e-6
    assert abs(fast.value - 0.5) < 1e-9


def test_rotation_number_irrational():
    # slope sqrt(2) is steep, so the graph axis flips and rho = 1/sqrt(2)
    spec = catalog.left_invariant(math.sqrt(2.0), 1.0)
    est = nullflow.rotation_number(spec, "X", n_returns=500)
    assert abs(est.value - 1.0 / math.sqrt(2.0)) < 1e-9
    # continued-fraction convergents of an irrational always fit the raw
    # residual tolerance eventually; the credibility product rejects them
    if est.rational is not None:
        r = est.rational
        assert r.q * r.residual > 1e-6 or r.q > 64


def test_classify_line_kinds(flat_spec):
    cls = nullflow.classify_line(flat_spec, (0.0, 0.1), "X")
    assert cls.kind == "Closed"
    assert cls.winding == (1, 1)
    sqrt2 = catalog.left_invariant(math.sqrt(2.0), 1.0)
    cls2 = nullflow.classify_line(sqrt2, (0.0, 0.0), "X")
    assert cls2.kind == "Dense"
    assert cls2.winding is None


def test_classify_line_rosatau(rosatau_spec):
    """Seeds in the band close; seeds in the attracting gap are asymptotic."""
    closed = nullflow.classify_line(rosatau_spec, (0.0, 0.7), "X")
    assert closed.kind == "Closed"
    assert closed.winding == (0, 1)
    at_zero = nullflow.classify_line(rosatau_spec, (0.3, 0.0), "X")
    assert at_zero.kind == "Closed"
    gap = nullflow.classify_line(rosatau_spec, (0.2, 0.0), "X")
    assert gap.kind == "Asymptotic"
    assert gap.limit_winding == (0, 1)


def test_closed_line_through_rejects_open():
    sqrt2 = catalog.left_invariant(math.sqrt(2.0), 1.0)
    fake = nullflow.RationalCertificate(3, 2, 0.09)
    with pytest.raises(DenseFlow):
        nullflow.closed_line_through(sqrt2, "X", 0.0, fake)


def test_decomposition_flat_all_resonant(flat_spec):
    dec = nullflow.cylinder_decomposition(flat_spec, "X")
    assert (dec.rotation.p, dec.rotation.q) == (1, 1)
    assert len(dec.resonant_intervals) == 1
    iv = dec.resonant_intervals[0]
    assert iv.width == pytest.approx(1.0, abs=1e-9)
    assert dec.isolated_closed == ()


def test_decomposition_dense_is_certified():
    sqrt2 = catalog.left_invariant(math.sqrt(2.0), 1.0)
    with pytest.raises(DenseFlow):
        nullflow.cylinder_decomposition(sqrt2, "X")


def test_decomposition_rosatau(rosatau_spec):
    """One resonant band away from the tau window, an isolated closed line
    at the simple zero, and asymptotic gaps on both sides of it."""
    dec = nullflow.cylinder_decomposition(rosatau_spec, "X")
    assert (dec.rotation.p, dec.rotation.q) == (0, 1)
    res = dec.resonant_intervals
    assert len(res) == 1
    assert res[0].lo == pytest.approx(0.45, abs=0.02)
    assert res[0].hi == pytest.approx(1.15, abs=0.02)
    assert len(dec.isolated_closed) == 1
    assert dec.isolated_closed[0] == pytest.approx(0.3, abs=1e-6)
    gaps = [iv for iv in dec.intervals if iv.kind == "Asymptotic"]
    assert len(gaps) == 2
    # the X family is quasi-vertical here: the transversal axis is x2
    assert dec.axis == 1


def test_decomposition_interval_bookkeeping(rosatau_spec):
    dec = nullflow.cylinder_decomposition(rosatau_spec, "X")
    total = sum(iv.width for iv in dec.intervals)
    assert total == pytest.approx(1.0, abs=1e-6)
    for iv in dec.intervals:
        assert iv.hi > iv.lo
        mid = 0.5 * (iv.lo + iv.hi)
        assert iv.contains(mid % 1.0)
        pts = iv.interior_points(3)
        assert all(iv.contains(p % 1.0) for p in pts)


def test_first_integral_analex(analex_spec, rng):
    F = nullflow.first_integral_function(analex_spec)
    # quasi-periods are (l1, -l2) = (1, 1) for this metric: both integral,
    # so exp(2 pi i F) descends to the torus
    assert F.quasi_periods == pytest.approx((1.0, 1.0), abs=1e-10)

    # constant along X lines
    rec = nullflow.integrate_null_line(analex_spec, (0.1, 0.55), "X",
                                       t_max=2.0)
    vals = [F(float(p[0]), float(p[1])) for p in rec.points[::100]]
    assert max(vals) - min(vals) < 1e-6

    # integer quasi-periods make exp(2 pi i F) a well-defined torus function
    for _ in range(5):
        x1, x2 = float(rng.random()), float(rng.random())
        base = F(x1, x2)
        assert F(x1 + 1.0, x2) - base == pytest.approx(1.0, abs=1e-10)
        assert F(x1, x2 + 1.0) - base == pytest.approx(1.0, abs=1e-10)


def test_completeness_flat_vs_ppwave(flat_spec, rosatau_spec):
    ok = nullflow.probe_completeness(flat_spec, (0.0, 0.0), "X", t_max=5.0)
    assert not ok.blowup_detected
    assert ok.complete_up_to == pytest.approx(5.0)

    probe = nullflow.probe_completeness(rosatau_spec, (0.3, 0.0), "X",
                                        t_max=20.0, step=5e-3)
    assert probe.blowup_detected
    assert probe.max_speed >= 1e8
    # the blowup happens within finite affine parameter in one direction
    assert probe.blowup_parameter is not None
    assert probe.blowup_parameter < 20.0
