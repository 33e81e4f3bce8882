"""Kernel solvers, covariant operators, and localized resonant sections."""

from fractions import Fraction

import numpy as np
import pytest

from nulltorus import catalog, classify, geometry, nullflow, spinorfield
from nulltorus.errors import (DenseFlow, NotHarmonic, NotXTrivial,
                              UnsupportedFamily, WrongFamily)
from nulltorus.spin import GAMMA1, GAMMA2, SpinStructure, all_structures


# ---------------------------------------------------------------------------
# covariant operators


def test_transport_of_fourier_modes_flat(flat_spec):
    s = SpinStructure(1, 1)
    # on the flat torus X = (1, 1), so nabla_X e(k,l) = 2 pi i (k+l) e(k,l)
    parallel = spinorfield.fourier_mode_field(flat_spec, s, (1, -1))
    moving = spinorfield.fourier_mode_field(flat_spec, s, (1, 0))
    assert spinorfield.residual_norm(parallel, "transport") < 1e-10
    out = spinorfield.nabla_along(moving, "X")
    assert np.allclose(out.values, 2j * np.pi * moving.values, atol=1e-9)


def test_dirac_routes_chiral_components(analex_spec):
    s = SpinStructure(-1, 1)
    pos = spinorfield.fourier_mode_field(analex_spec, s, (2, 1), chirality=1)
    neg = spinorfield.fourier_mode_field(analex_spec, s, (0, 3), chirality=-1)
    phi = spinorfield.SpinorField(positive=pos, negative=neg)
    d = spinorfield.dirac_apply(phi)
    assert np.allclose(d.negative.values,
                       1j * spinorfield.nabla_along(pos, "X").values)
    assert np.allclose(d.positive.values,
                       1j * spinorfield.nabla_along(neg, "Y").values)


def test_penrose_operator_is_gamma_trace_free(analex_spec):
    # -gamma(s1) P_1 + gamma(s2) P_2 = 0 holds identically, for any section
    s = SpinStructure(1, -1)
    pos = spinorfield.fourier_mode_field(analex_spec, s, (1, 2), chirality=1)
    neg = spinorfield.fourier_mode_field(analex_spec, s, (-2, 1), chirality=-1)
    phi = spinorfield.SpinorField(positive=pos, negative=neg)
    p1, p2 = spinorfield.twistor_apply(phi)
    trace = (-np.einsum("ab,b...->a...", GAMMA1, p1.component_grids())
             + np.einsum("ab,b...->a...", GAMMA2, p2.component_grids()))
    assert np.max(np.abs(trace)) < 1e-9


def test_residual_norm_equivalences(analex_spec):
    s = SpinStructure(1, 1)
    f = spinorfield.fourier_mode_field(analex_spec, s, (1, 1), chirality=1)
    # for a pure positive half, the Dirac residual is the X-transport defect
    assert spinorfield.residual_norm(f, "harmonic") == pytest.approx(
        spinorfield.residual_norm(f, "transport"), rel=1e-12)
    with pytest.raises(ValueError):
        spinorfield.residual_norm(f, "heat")


# ---------------------------------------------------------------------------
# left-invariant solver vs brute-forced mode search


def _mode_condition(spec, structure, family, k, l):
    lam1, lam2 = float(spec.lam1), float(spec.lam2)
    sign = 1.0 if family == "X" else -1.0
    return ((4 * k + 1 - structure.a1) * lam2
            + sign * (4 * l + 1 - structure.a2) * lam1)


@pytest.mark.parametrize("lams", [(1, 1), (1, 2), (3, 2)])
@pytest.mark.parametrize("family", ["X", "Y"])
def test_left_invariant_solver_matches_brute_force(lams, family):
    spec = catalog.left_invariant(*lams)
    ratio = Fraction(lams[0], lams[1])
    p, q = ratio.numerator, ratio.denominator
    for s in all_structures():
        brute = [(k, l) for k in range(-8, 9) for l in range(-8, 9)
                 if _mode_condition(spec, s, family, k, l) == 0]
        sol = spinorfield.solve_left_invariant(spec, s, family=family)
        if not brute:
            assert sol.count_class == "Zero"
            assert sol.congruence_obstructed
            assert sol.fields == ()
        else:
            # solutions always come as a full lattice line, never one point
            assert len(brute) >= 2
            assert sol.count_class == "Infinite"
            assert set(sol.modes) >= set(
                m for m in brute if max(abs(m[0]), abs(m[1])) <= 2)
        # solvability is the character condition on the closed-line winding
        assert (sol.count_class == "Infinite") == (s.character((q, p)) == 1)
        assert sol.ratio == ratio
        assert sol.exact
        for f in sol.fields:
            k, l = f.meta["mode"]
            assert _mode_condition(spec, s, family, k, l) == 0
            defect = spinorfield.nabla_along(f, family)
            assert float(np.max(np.abs(defect.values))) < 1e-9


def test_left_invariant_lattice_line():
    spec = catalog.left_invariant(1, 2)
    sol = spinorfield.solve_left_invariant(spec, SpinStructure(1, 1))
    lat = sol.lattice
    assert lat is not None
    assert set(sol.modes) <= {lat.mode(t) for t in range(-40, 41)}
    # the direction spans the homogeneous solutions: k*q + l*p = 0
    dk, dl = lat.direction
    assert dk * 2 + dl * 1 == 0


def test_left_invariant_irrational(sqrt2_spec):
    for s in all_structures():
        sol = spinorfield.solve_left_invariant(sqrt2_spec, s)
        assert sol.ratio is None
        if s.trivial:
            assert sol.count_class == "One"
            assert sol.modes == ((0, 0),)
            assert spinorfield.residual_norm(sol.fields[0], "transport") < 1e-9
        else:
            assert sol.count_class == "Zero"
            assert sol.fields == ()


def test_left_invariant_rejects_other_families(analex_spec):
    with pytest.raises(WrongFamily):
        spinorfield.solve_left_invariant(analex_spec, SpinStructure(1, 1))


# ---------------------------------------------------------------------------
# closed diagonal solver


def test_phase_exponent_is_twice_first_integral(analex_spec):
    n = 256
    G = spinorfield.phase_exponent_grid(analex_spec, n)
    first = nullflow.first_integral_function(analex_spec, n)
    from nulltorus.gridtools import grid_points
    X1, X2 = grid_points(n)
    assert np.max(np.abs(G - 2.0 * first(X1, X2))) < 1e-10


def test_closed_diagonal_solvability_pattern(analex_spec):
    # closed X-lines wind (1, -1), so the character test picks a1 == a2
    for s in all_structures():
        sol = spinorfield.solve_closed_diagonal(analex_spec, s, grid_n=256)
        assert sol.ratio is not None and (sol.ratio.p, sol.ratio.q) == (-1, 1)
        if s.a1 == s.a2:
            assert sol.solvable and sol.count_class == "Infinite"
            assert sol.t_parity == (0 if s.trivial else 1)
        else:
            assert not sol.solvable
            assert sol.congruence_obstructed
            assert sol.count_class == "Zero" and sol.fields == ()


@pytest.mark.parametrize("ab,chirality", [((1, 1), 1), ((1, 1), -1),
                                          ((-1, -1), 1), ((-1, -1), -1)])
def test_closed_diagonal_fields_solve_their_equation(analex_spec, ab,
                                                     chirality):
    sol = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(*ab),
                                            chirality=chirality, grid_n=256)
    op = "harmonic" if chirality == 1 else "twistor"
    for f in sol.fields:
        assert abs(f.sup_norm() - 1.0) < 1e-12
        assert spinorfield.residual_norm(f, op) < 1e-10
    if ab == (1, 1):
        # alpha = 0 gives the constant section
        assert sol.alphas[0] == 0.0
        assert np.allclose(sol.fields[0].values, sol.fields[0].values[0, 0])


def test_closed_diagonal_alphas_are_equivariant(analex_spec):
    # exp(i pi alpha G) changes by exp(2 pi i alpha l1) over the first period
    # and exp(-2 pi i alpha l2) over the second; together with the twist the
    # periodic representative must come back to itself
    for ab in [(1, 1), (-1, -1)]:
        s = SpinStructure(*ab)
        sol = spinorfield.solve_closed_diagonal(analex_spec, s, grid_n=128)
        for alpha in sol.alphas:
            assert s.a1 * np.exp(2j * np.pi * alpha * sol.l1) == \
                pytest.approx(1.0, abs=1e-12)
            assert s.a2 * np.exp(-2j * np.pi * alpha * sol.l2) == \
                pytest.approx(1.0, abs=1e-12)
        # shifting the parity by one breaks equivariance
        bad = sol.alphas[0] + sol.ratio.p / (2 * sol.l1)
        assert abs(s.a1 * np.exp(2j * np.pi * bad * sol.l1) - 1.0) > 1.0


def test_closed_diagonal_rejects_non_diagonal(sanchez_spec):
    with pytest.raises(WrongFamily):
        spinorfield.solve_closed_diagonal(sanchez_spec, SpinStructure(1, 1))


# ---------------------------------------------------------------------------
# conformal rescaling of kernel fields


def test_conformal_map_weights(analex_spec, conformal_spec):
    sol = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(1, 1),
                                            grid_n=256)
    f = sol.fields[1]
    from nulltorus.gridtools import grid_points
    X1, X2 = grid_points(f.grid_n)
    lam = conformal_spec.factor_at(X1, X2)

    up = spinorfield.conformal_map_spinor(f, conformal_spec, "harmonic")
    assert up.meta["conformal_weight"] == -0.25
    assert np.allclose(up.values, lam ** -0.25 * f.values)
    assert spinorfield.residual_norm(up, "harmonic") < 1e-6

    tw = spinorfield.conformal_map_spinor(f, conformal_spec, "twistor")
    assert np.allclose(tw.values, lam ** 0.25 * f.values)

    down = spinorfield.conformal_map_spinor(up, analex_spec, "harmonic")
    assert np.allclose(down.values, f.values, rtol=1e-12)


def test_conformal_map_requires_matching_specs(analex_spec, flat_spec):
    f = spinorfield.constant_field(analex_spec, SpinStructure(1, 1))
    with pytest.raises(WrongFamily):
        spinorfield.conformal_map_spinor(f, flat_spec)
    with pytest.raises(ValueError):
        spinorfield.conformal_map_spinor(f, flat_spec, kind="dirac")


# ---------------------------------------------------------------------------
# localized sections on resonant cylinders


def _max_support_overlap(fields):
    worst = 0.0
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            worst = max(worst, float(np.max(np.abs(fields[i].values)
                                            * np.abs(fields[j].values))))
    return worst


def test_resonant_bumps_closed_diagonal(analex_spec):
    fields = spinorfield.construct_resonant_spinors(
        analex_spec, SpinStructure(1, 1), count=2, grid_n=1024)
    assert len(fields) == 2
    assert _max_support_overlap(fields) == 0.0
    for f in fields:
        assert f.sup_norm() == pytest.approx(1.0, abs=1e-6)
        assert spinorfield.residual_norm(f, "harmonic") < 1e-6
    # the same construction must refuse structures whose character on the
    # closed lines (winding (1, -1)) is -1: transport has no periodic fix
    with pytest.raises(NotXTrivial):
        spinorfield.construct_resonant_spinors(
            analex_spec, SpinStructure(1, -1), count=2, grid_n=256)


def test_resonant_bumps_rosatau(rosatau_spec):
    fields = spinorfield.construct_resonant_spinors(
        rosatau_spec, SpinStructure(1, 1), count=2, grid_n=1024)
    assert _max_support_overlap(fields) == 0.0
    lo, hi = fields[0].meta["band"]
    assert lo == pytest.approx(0.45, abs=0.02)
    assert hi == pytest.approx(1.15, abs=0.02)
    for f in fields:
        assert spinorfield.residual_norm(f, "harmonic") < 1e-6
    # vertical lines wind (0, 1): a2 = -1 structures have no periodic fix
    with pytest.raises(NotXTrivial):
        spinorfield.construct_resonant_spinors(
            rosatau_spec, SpinStructure(1, -1), count=2, grid_n=256)


def test_resonant_bumps_conformal_pushforward(conformal_spec):
    fields = spinorfield.construct_resonant_spinors(
        conformal_spec, SpinStructure(1, 1), count=2, grid_n=1024)
    assert _max_support_overlap(fields) == 0.0
    for f in fields:
        assert f.spec is conformal_spec
        assert spinorfield.residual_norm(f, "harmonic") < 1e-6


def test_resonant_bumps_dense_and_unsupported(sqrt2_spec, sanchez_spec):
    with pytest.raises(DenseFlow):
        spinorfield.construct_resonant_spinors(sqrt2_spec, SpinStructure(1, 1))
    with pytest.raises(UnsupportedFamily):
        spinorfield.construct_resonant_spinors(sanchez_spec,
                                               SpinStructure(1, 1))
    with pytest.raises(ValueError):
        spinorfield.construct_resonant_spinors(sqrt2_spec, SpinStructure(1, 1),
                                               count=0)


# ---------------------------------------------------------------------------
# harmonic <-> twistor correspondence


def test_harmonic_twistor_iso_roundtrip(analex_spec):
    sol = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(1, 1),
                                            grid_n=256)
    f = sol.fields[1]
    psi = spinorfield.harmonic_twistor_iso(f)
    assert psi.chirality == -1
    assert spinorfield.residual_norm(psi, "twistor") < 1e-6
    back = spinorfield.harmonic_twistor_iso(psi)
    assert back.chirality == 1
    assert np.allclose(back.values, f.values, rtol=1e-10)


def test_harmonic_twistor_iso_explicit_certificate(analex_spec):
    cert = classify.semi_conformal_certificate(analex_spec, family="X")
    sol = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(-1, -1),
                                            grid_n=256)
    psi = spinorfield.harmonic_twistor_iso(sol.fields[0], cert)
    assert spinorfield.residual_norm(psi, "twistor") < 1e-6


def test_harmonic_twistor_iso_rejects_non_kernel_input(analex_spec):
    junk = spinorfield.fourier_mode_field(analex_spec, SpinStructure(1, 1),
                                          (3, 0))
    with pytest.raises(NotHarmonic):
        spinorfield.harmonic_twistor_iso(junk)
