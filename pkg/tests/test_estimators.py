import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from perpetua import InputError, LDMEstimator, RegVarFn, TailExponentEstimator, sample_stationary


def test_tail_estimator_on_known_law(rng):
    # P(Z > t) = exp(-0.5 t^2) exactly
    z = np.sqrt(rng.standard_exponential(200_000) / 0.5)
    est = TailExponentEstimator(t_grid=[1.0, 2.0, 3.0, 5.0]).fit(z)
    ok = ~est.floor_hit_
    assert np.allclose(est.ratios_[ok], 0.5, atol=0.02)
    assert est.exponent_ == pytest.approx(0.5, abs=0.03)
    assert est.predict_log_survival(2.0) == pytest.approx(-est.exponent_ * 4)


def test_tail_estimator_default_grid_and_clone(intro_model):
    x = sample_stationary(intro_model, n=50_000, rng=np.random.default_rng(0))
    est = TailExponentEstimator(f=RegVarFn(2.0), min_hits=20)
    c = clone(est)
    assert c.get_params()["min_hits"] == 20
    c.fit(x)
    assert c.t_grid_.size == 20 and c.hits_[-1] >= 20
    assert 0.3 < c.exponent_ < 0.9


def test_tail_estimator_errors():
    with pytest.raises(NotFittedError):
        TailExponentEstimator().predict_log_survival(1.0)
    with pytest.raises(InputError):
        TailExponentEstimator().fit(np.array([-1.0, 2.0]))


def test_ldm_estimator(intro_model):
    a, b = intro_model.sample(400_000, np.random.default_rng(3))
    est = LDMEstimator(y_grid=[0.0, 0.5, 1.0, 1.5], t=2.0).fit(np.column_stack([a, b]))
    want = [-intro_model.log_event_prob(2.0, y) / 4.0 for y in (0.0, 0.5, 1.0, 1.5)]
    assert np.allclose(est.g_, want, atol=0.02)
    assert est.predict(0.25) == pytest.approx(0.5 * (est.g_[0] + est.g_[1]))
    assert est.a_plus_ == pytest.approx(0.5, abs=1e-3)
    with pytest.raises(InputError):
        LDMEstimator().fit(np.ones((10, 3)))
