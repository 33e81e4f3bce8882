"""Flatness certificates, mass functionals, and the dimension classification."""

import numpy as np
import pytest

from nulltorus import catalog, classify, geometry, spinorfield
from nulltorus.errors import NotHarmonic, NotSCF, WrongFamily
from nulltorus.gridtools import grid_points
from nulltorus.spin import SpinStructure, all_structures


# ---------------------------------------------------------------------------
# semi-conformal flatness certificates


def test_certificate_closed_diagonal_analytic(analex_spec):
    cert = classify.semi_conformal_certificate(analex_spec, "X")
    assert cert.kind == "analytic"
    assert cert.residual < 1e-8
    # the certified field spans the X-line field pointwise
    for p in [(0.0, 0.0), (0.31, 0.77), (0.62, 0.05)]:
        v1, v2 = cert.field.at(*p)
        X, _ = geometry.null_directions(analex_spec, p)
        assert abs(v1 * X[1] - v2 * X[0]) < 1e-12


def test_certificate_sanchez_sides(sanchez_spec):
    cert = classify.semi_conformal_certificate(sanchez_spec, "Y")
    assert cert.kind == "analytic"
    assert cert.residual < 1e-8
    # the other family is obstructed by the simple zeros of the coefficient
    # in front of d1: each carries loop integral |G'/w| = 0.4 pi of div(X)
    with pytest.raises(NotSCF) as exc:
        classify.semi_conformal_certificate(sanchez_spec, "X")
    assert exc.value.obstruction == pytest.approx(0.4 * np.pi, rel=1e-3)
    assert 4 * exc.value.location == pytest.approx(
        round(4 * exc.value.location), abs=1e-3)


def test_certificate_rosatau_sides(rosatau_spec):
    cert = classify.semi_conformal_certificate(rosatau_spec, "Y")
    assert cert.kind == "analytic"
    v1, v2 = cert.field.at(0.2, 0.9)
    assert (v1, v2) == (-1.0, 0.0)
    # tau has a simple zero of unit slope: loop integral 1/2 obstructs X
    with pytest.raises(NotSCF) as exc:
        classify.semi_conformal_certificate(rosatau_spec, "X")
    assert exc.value.obstruction == pytest.approx(0.5, abs=1e-6)
    assert exc.value.location == pytest.approx(0.3, abs=1e-6)


def test_certificate_conformal_invariance(analex_spec, conformal_spec):
    cert = classify.semi_conformal_certificate(conformal_spec, "X")
    assert cert.kind == "conformal"
    assert cert.residual < 1e-8
    # inner certificate divided by the factor
    inner = classify.semi_conformal_certificate(analex_spec, "X")
    p = (0.41, 0.13)
    lam = float(conformal_spec.factor_at(*p))
    assert np.allclose(cert.field.at(*p),
                       np.asarray(inner.field.at(*p)) / lam)


def test_certificate_conformal_propagates_obstruction(rosatau_spec):
    rescaled = catalog.conformal(rosatau_spec, catalog.exp_sine_factor(0.2))
    with pytest.raises(NotSCF) as exc:
        classify.semi_conformal_certificate(rescaled, "X")
    assert exc.value.obstruction == pytest.approx(0.5, abs=1e-6)


def test_certificate_numeric_rescaling_route():
    # conformally flat but with non-closed coefficients, so no analytic
    # shortcut applies and the loop test + least-squares transport solve run
    f = lambda x1, x2: np.exp(0.15 * np.sin(2 * np.pi * x1)
                              * np.sin(2 * np.pi * x2))
    spec = geometry.Diagonal(lam1=f, lam2=f, grid_n=128)
    cert = classify.semi_conformal_certificate(spec, "X")
    assert cert.kind == "rescaling"
    assert cert.residual < 1e-8
    assert cert.exponent is not None


def test_is_x_conformally_flat(analex_spec, rosatau_spec, flat_spec):
    assert classify.is_x_conformally_flat(analex_spec) is not None
    assert classify.is_x_conformally_flat(rosatau_spec) is None
    assert classify.conformal_flatness_test(flat_spec)
    assert not classify.conformal_flatness_test(rosatau_spec)
    with pytest.raises(ValueError):
        classify.semi_conformal_certificate(flat_spec, "Z")


# ---------------------------------------------------------------------------
# dimension classification


def test_classify_dense_table(sqrt2_spec):
    table = classify.classify_table(sqrt2_spec, ("delta_plus",))
    for ab, row in table.items():
        rep = row["delta_plus"]
        assert rep.certificate == "DenseLine"
        assert rep.value == ("One" if ab == (1, 1) else "Zero")
        assert rep.scf is not None        # constant metrics certify


def test_classify_analex_table(analex_spec):
    table = classify.classify_table(analex_spec, ("delta_plus",))
    for (a1, a2), row in table.items():
        rep = row["delta_plus"]
        assert rep.scf is not None and rep.scf.kind == "analytic"
        if a1 == a2:
            assert rep.value == "Infinite"
            assert rep.certificate == "XTrivialResonant"
            assert rep.details["sampled_lines"] >= 5
        else:
            assert rep.value == "Zero"
            assert rep.certificate == "NoXTrivialResonant"
            failures = rep.details["holonomy_failures"]
            assert failures and all(f["character"] == -1 for f in failures)
            assert all(abs(f["boost"]) < 1e-8 for f in failures)


def test_classify_rosatau_table(rosatau_spec):
    # no certificate exists (tau has a simple zero), yet the resonant band
    # still carries transport-trivial lines for the a2 = +1 structures
    table = classify.classify_table(rosatau_spec, ("delta_plus",))
    for (a1, a2), row in table.items():
        rep = row["delta_plus"]
        assert rep.scf is None
        assert "scf_obstruction" in rep.details
        if a2 == 1:
            assert rep.value == "Infinite"
            assert rep.certificate == "XTrivialResonant"
        else:
            assert rep.value == "Zero"
            assert rep.certificate == "NoXTrivialResonant"


def test_classify_quantity_pairing(analex_spec):
    # delta_plus and tau_minus ride the same X-transport; the geometric
    # verdict cannot tell the chiralities apart
    table = classify.classify_table(analex_spec, ("delta_plus", "tau_minus"))
    for row in table.values():
        assert row["delta_plus"].value == row["tau_minus"].value
        assert row["delta_plus"].family == row["tau_minus"].family == "X"
        assert row["delta_plus"].details["chirality"] == 1
        assert row["tau_minus"].details["chirality"] == -1


def test_classify_argument_validation(analex_spec):
    with pytest.raises(ValueError):
        classify.classify_dimension(analex_spec, SpinStructure(1, 1), "mass")
    ctx = classify._family_context(analex_spec, "Y", classify.DEFAULT)
    with pytest.raises(ValueError):
        classify.classify_dimension(analex_spec, SpinStructure(1, 1),
                                    "delta_plus", _context=ctx)


def test_classify_report_as_dict(analex_spec):
    rep = classify.classify_delta_plus(analex_spec, SpinStructure(1, 1))
    d = rep.as_dict()
    assert d["structure"] == [1, 1]
    assert d["value"] == "Infinite"
    assert d["scf"]["kind"] == "analytic"
    assert "cylinder" in d["details"]


@pytest.mark.parametrize("ab", [(1, 1), (1, -1)])
def test_cross_validate_wave(wave12_spec, ab):
    rep = classify.cross_validate(wave12_spec, SpinStructure(*ab))
    assert rep.agree
    # closed lines wind (2, 1), so the kernel is infinite exactly for a2 = 1
    assert rep.geometric.value == ("Infinite" if ab[1] == 1 else "Zero")


def test_cross_validate_left_invariant(sqrt2_spec):
    for s in all_structures():
        rep = classify.cross_validate(sqrt2_spec, s)
        assert rep.agree
        assert rep.spectral == ("One" if s.trivial else "Zero")


def test_cross_validate_needs_exact_solver(sanchez_spec):
    with pytest.raises(WrongFamily):
        classify.cross_validate(sanchez_spec, SpinStructure(1, 1))


# ---------------------------------------------------------------------------
# mass functional and associated vector field


def test_associated_vector_field_flat(flat_spec):
    s = SpinStructure(1, 1)
    pos = spinorfield.constant_field(flat_spec, s, 1, 1.0, grid_n=32)
    v1, v2 = classify.associated_vector_field(pos)
    assert np.allclose(v1, 1.0) and np.allclose(v2, 1.0)   # V = X
    both = spinorfield.SpinorField(
        positive=pos, negative=spinorfield.constant_field(flat_spec, s, -1,
                                                          1.0, grid_n=32))
    v1, v2 = classify.associated_vector_field(both)
    assert np.allclose(v1, 2.0) and np.allclose(v2, 0.0)   # X - Y = 2 s1


def test_associated_vector_field_is_causal(analex_spec):
    s = SpinStructure(1, 1)
    n = 64
    X1, X2 = grid_points(n)
    pos = spinorfield.HalfSpinorField(
        analex_spec, s, 1, np.exp(2j * np.pi * X1) * (1 + 0.3 * np.cos(
            2 * np.pi * X2)))
    neg = spinorfield.HalfSpinorField(
        analex_spec, s, -1, 0.5 + 0.25 * np.sin(2 * np.pi * (X1 + X2)) + 0j)
    psi = spinorfield.SpinorField(positive=pos, negative=neg)
    v1, v2 = classify.associated_vector_field(psi)
    A, B, C = geometry.coefficients(analex_spec, X1, X2)
    norm2 = A * v1 ** 2 + 2 * B * v1 * v2 + C * v2 ** 2
    expected = -4.0 * np.abs(pos.values) ** 2 * np.abs(neg.values) ** 2
    assert np.max(np.abs(norm2 - expected)) < 1e-9


def test_mass_functional_phase_field(analex_spec):
    cert = classify.semi_conformal_certificate(analex_spec, "X")
    sol = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(1, 1),
                                            grid_n=256)
    m = classify.mass_functional(analex_spec, cert, sol.fields[1])
    # unit-modulus positive fields have mu = -2 |phi^+|^2 = -2 exactly
    assert m.min() == pytest.approx(-2.0, abs=1e-9)
    assert m.max() == pytest.approx(-2.0, abs=1e-9)
    assert m.drift < 1e-6


def test_mass_functional_gates_inputs(analex_spec):
    cert = classify.semi_conformal_certificate(analex_spec, "X")
    junk = spinorfield.fourier_mode_field(analex_spec, SpinStructure(1, 1),
                                          (2, 0))
    with pytest.raises(NotHarmonic):
        classify.mass_functional(analex_spec, cert, junk)
    bad_cert = classify.SCFCertificate("X", cert.field, 1.0, "analytic",
                                       cert.grid_n)
    good = spinorfield.solve_closed_diagonal(analex_spec, SpinStructure(1, 1),
                                             grid_n=128).fields[0]
    with pytest.raises(NotSCF):
        classify.mass_functional(analex_spec, bad_cert, good)
