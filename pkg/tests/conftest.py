import numpy as np
import pytest

from perpetua import ALaw, AlphaFn, AtomSurvivalModel, BLaw, IndependentModel, RegVarFn


@pytest.fixture
def intro_model():
    return IndependentModel(ALaw("uniform", 0.5), BLaw("weibull", sigma=1.0, rho=2.0))


@pytest.fixture
def f2():
    return RegVarFn(2.0)


@pytest.fixture
def atom_a2():
    return AtomSurvivalModel(2.0, AlphaFn.case_a(2.0))


@pytest.fixture
def atom_b3():
    return AtomSurvivalModel(3.0, AlphaFn.case_b())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
