import numpy as np
import pytest

from nulltorus import catalog

# Session-scoped metric zoo: frozen specs are hashable and the flow/series
# caches key on the instance, so every test must reuse these objects instead
# of rebuilding (catalog constructors capture fresh closures each call).


@pytest.fixture(scope="session")
def flat_spec():
    return catalog.flat()


@pytest.fixture(scope="session")
def sqrt2_spec():
    return catalog.left_invariant(np.sqrt(2.0), 1.0)


@pytest.fixture(scope="session")
def analex_spec():
    return catalog.analex()


@pytest.fixture(scope="session")
def sanchez_spec():
    return catalog.analex_sanchez()


@pytest.fixture(scope="session")
def rosatau_spec():
    return catalog.rosatau_window()


@pytest.fixture(scope="session")
def wave12_spec():
    return catalog.closed_diagonal_wave(1.0, 2.0, amp=0.08)


@pytest.fixture(scope="session")
def conformal_spec(analex_spec):
    return catalog.conformal(analex_spec, catalog.exp_sine_factor(amp=0.25))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240815)
