import numpy as np
import pytest

from perpetua.checks import (b_marginal_check, conditional_formula_check, empirical_joint_survival,
                             joint_survival_check, pqd_gap, validate_model)


def test_atom_model_passes_sampler_checks(atom_a2):
    checks = validate_model(atom_a2, 200_000, seed=1, workers=1)
    assert [c.name for c in checks] == ["joint_survival_z", "b_marginal_z",
                                        "conditional_survival_fd", "pqd_violated"]
    assert all(c.passed for c in checks), checks


def test_independent_model_factorises(intro_model):
    assert pqd_gap(intro_model) == 0.0
    checks = validate_model(intro_model, 100_000, seed=2, workers=1)
    assert all(c.passed for c in checks), checks


def test_atom_model_is_not_pqd(atom_b3):
    assert pqd_gap(atom_b3) < 0


def test_joint_survival_check_detects_wrong_law(atom_a2, atom_b3):
    # draws from one alpha scored against the other's closed form
    class Swapped:
        a_plus = 1.0
        sample = atom_b3.sample
        joint_survival = atom_a2.joint_survival
    c = joint_survival_check(Swapped(), 200_000, seed=3, a_grid=[0.1, 0.5], b_grid=[1.1, 1.3])
    assert not c.passed


def test_empirical_joint_survival_shape(intro_model):
    e = empirical_joint_survival(intro_model, [0.0, 0.25], [0.5, 1.0, 2.0], 10_000, seed=0)
    assert e.shape == (2, 3) and np.all(np.diff(e, axis=1) <= 0)


def test_conditional_formula(atom_b3):
    assert conditional_formula_check(atom_b3).passed


def test_b_marginal(intro_model):
    assert b_marginal_check(intro_model, 100_000, seed=5).passed
