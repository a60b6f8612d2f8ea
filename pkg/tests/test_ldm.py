import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perpetua import (ALaw, AlphaFn, BLaw, Example8LDM, IndependentModel, InputError, LDMCurve,
                      PQDLDM, PropertyFailure, RegVarFn, StepLDM, UnsupportedQueryError,
                      closed_form_ldm, ldm_estimate, ldm_example8, ldm_pqd)


def brute_example8(alpha, rho, y, n=10**6):
    a = np.linspace(0.0, 1.0 - 1e-9, n)
    v = (1 - y * a) ** rho * alpha(a)
    i = int(np.argmin(v))
    return v[i], a[i]


def test_pqd_values():
    assert ldm_pqd(2.0, 0.5, 2.0, 1.0) == pytest.approx(0.5)
    assert ldm_pqd(2.0, 0.5, 2.0, 3.0) == 0.0
    assert np.allclose(ldm_pqd(1.0, 1.0, 1.0, [0, 0.25, 1]), [1, 0.75, 0])


@pytest.mark.parametrize("alpha,rho,y", [(AlphaFn.case_b(), 3.0, 0.5), (AlphaFn.case_b(), 2.5, 0.8),
                                         (AlphaFn.case_a(3.0), 3.0, 0.9), (AlphaFn.case_a(2.0), 2.0, 0.7)])
def test_example8_against_grid_oracle(alpha, rho, y):
    want, arg = brute_example8(alpha, rho, y)
    got, got_arg = ldm_example8(alpha, rho, y, return_argmin=True)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)
    assert got <= want + 1e-12
    assert got_arg == pytest.approx(arg, abs=1e-4)


def test_example8_case_b_rho3_half():
    g, a = ldm_example8(AlphaFn.case_b(), 3.0, 0.5, return_argmin=True)
    assert g == pytest.approx(0.9344365, abs=1e-6)
    assert a == pytest.approx(0.2324, abs=1e-3)


def test_example8_case_a_rho2_closed_form():
    y = np.linspace(0.0, 1.0, 41)
    want = np.where(y <= 0.5, 1.0, 4 * y * (1 - y))
    assert np.allclose(ldm_example8(AlphaFn.case_a(2.0), 2.0, y), want, atol=1e-10)


def test_example8_case_b_jumps_at_one():
    g = ldm_example8(AlphaFn.case_b(), 3.0, np.array([1.0, 1.0 + 1e-12]))
    assert g[0] > 0.27 and g[1] == 0.0


@settings(max_examples=25, deadline=None)
@given(rho=st.floats(1.1, 4.0), ys=st.lists(st.floats(0.0, 1.5), min_size=2, max_size=8))
def test_example8_structure(rho, ys):
    y = np.unique(ys)
    g = np.asarray(ldm_example8(AlphaFn.case_a(rho), rho, y))
    assert np.all(np.diff(g) <= 1e-12)
    assert np.all(g[y > 1] == 0)
    lb = np.maximum(1 - y, 0) ** rho
    assert np.all(g >= lb * (1 - 1e-9))


def test_closed_form_dispatch(intro_model, atom_b3):
    g = closed_form_ldm(intro_model, RegVarFn(2.0))
    assert isinstance(g, PQDLDM) and g.gamma == 1.0 and g.a_plus == 0.5
    assert closed_form_ldm(intro_model, RegVarFn(2.0, scale=4.0)).gamma == pytest.approx(0.25)
    assert isinstance(closed_form_ldm(intro_model, RegVarFn(1.0)), StepLDM)
    assert closed_form_ldm(intro_model, RegVarFn(3.0)).gamma == 0.0
    e8 = closed_form_ldm(atom_b3, RegVarFn(3.0, scale=2.0))
    assert isinstance(e8, Example8LDM) and e8.gamma0 == 0.5
    with pytest.raises(UnsupportedQueryError):
        closed_form_ldm(atom_b3, RegVarFn(2.0))
    with pytest.raises(UnsupportedQueryError):
        closed_form_ldm(atom_b3, RegVarFn(3.0, log_exponent=1.0))


def test_step_ldm():
    g = StepLDM(0.5, 2.0)
    assert math.isinf(g(1.0)) and g(2.5) == 0.0


def test_quadrature_estimate_converges(intro_model, atom_a2):
    f = RegVarFn(2.0)
    est = ldm_estimate(intro_model, f, 0.6, [10.0, 100.0, 1000.0])
    assert not est.floor_hit.any()
    assert est.estimate == pytest.approx(ldm_pqd(1.0, 0.5, 2.0, 0.6), abs=0.01)
    errs = np.abs(est.ratios - 0.49)
    assert errs[-1] < errs[0]
    est8 = ldm_estimate(atom_a2, f, 0.8, [1000.0])
    assert est8.estimate == pytest.approx(4 * 0.8 * 0.2, abs=0.01)


def test_monte_carlo_estimate_and_floor(intro_model):
    f = RegVarFn(2.0)
    est = ldm_estimate(intro_model, f, 0.5, [1.0, 2.0, 6.0], mode="monte_carlo",
                       n_samples=200_000, seed=3)
    q = ldm_estimate(intro_model, f, 0.5, [1.0, 2.0])
    assert np.allclose(est.ratios[:2], q.ratios, atol=0.02)
    assert est.floor_hit[-1] and not est.floor_hit[0]
    assert est.estimate == pytest.approx(est.ratios[1])


def test_monte_carlo_impossible_event_is_infinite():
    m = IndependentModel(ALaw("uniform", 0.5), BLaw("point", value=1.0))
    est = ldm_estimate(m, RegVarFn(1.0), 1.0, [10.0], mode="monte_carlo", n_samples=100_000)
    assert est.infinite and math.isinf(est.estimate)
    q = ldm_estimate(m, RegVarFn(1.0), 1.0, [10.0])
    assert q.infinite


def test_estimate_input_errors(intro_model):
    f = RegVarFn(2.0)
    with pytest.raises(InputError):
        ldm_estimate(intro_model, f, 0.5, [2.0, 1.0])
    with pytest.raises(InputError):
        ldm_estimate(intro_model, f, -0.5, [1.0])
    with pytest.raises(InputError):
        ldm_estimate(intro_model, f, 0.5, [1.0], mode="monte_carlo", n_samples=1000)
    with pytest.raises(InputError):
        ldm_estimate(intro_model, f, 0.5, [1.0], mode="magic")


def test_curve_invariants_and_interpolation():
    y = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
    v = ldm_pqd(1.0, 0.5, 2.0, y)
    c = LDMCurve(y, v, "pqd_closed", 2.0, 1.0, 0.5)
    assert all(c.check_invariants().values())
    assert c(0.25) == pytest.approx(0.5 * (v[0] + v[1]))
    assert c(2.5) == 0.0
    with pytest.raises(PropertyFailure):
        LDMCurve(y, v[::-1], "pqd_closed", 2.0, 1.0, 0.5)
    with pytest.raises(PropertyFailure):
        LDMCurve(y, v * 0.5, "pqd_closed", 2.0, 1.0, 0.5)
    with pytest.raises(InputError):
        LDMCurve(y, v, "guess", 2.0, 1.0, 0.5)
    # finite-t curves are only required to be monotone
    LDMCurve(y, v + 0.01, "finite_t_estimate", 2.0, 1.0, 0.5)


def test_curve_from_closed_form_matches():
    g = Example8LDM(AlphaFn.case_b(), 3.0)
    y = np.linspace(0.05, 1.2, 24)
    c = g.to_curve(y)
    assert np.allclose(c(y), g(y))
