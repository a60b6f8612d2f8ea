import math

import numpy as np
import pytest

from perpetua import (ALaw, BLaw, IndependentModel, InputError, PreconditionError, RegVarFn,
                      envelope, iterate, one_step_tail, sample_stationary,
                      stochastic_monotonicity_check, tail_log_estimate)
from perpetua.perpetuity import default_checkpoints, truncation_bias_bound
from perpetua.rng import CHUNK


@pytest.fixture
def det_model():
    return IndependentModel(ALaw("point", 0.5), BLaw("point", value=1.0))


def test_iterate_deterministic(det_model):
    x = iterate(det_model, 10)
    assert np.allclose(x, 2 * (1 - 0.5 ** np.arange(11)))
    assert iterate(det_model, 10, streaming=True) == pytest.approx(x[-1])
    assert iterate(det_model, 3, x0=4.0)[-1] == pytest.approx(4 / 8 + 2 * (1 - 1 / 8))
    with pytest.raises(InputError):
        iterate(det_model, -1)


def test_iterate_streaming_matches_full(intro_model):
    full = iterate(intro_model, 5000, rng=np.random.default_rng(7))
    last = iterate(intro_model, 5000, rng=np.random.default_rng(7), streaming=True)
    assert last == pytest.approx(full[-1], rel=1e-12)


def test_stationary_series(det_model, intro_model):
    x = sample_stationary(det_model, trunc_tol=1e-12, n=10)
    assert np.all(np.abs(x - 2.0) <= truncation_bias_bound(det_model, 1e-12))
    assert math.isinf(truncation_bias_bound(intro_model, 1e-12))
    # E X = E B / (1 - E A) = (sqrt(pi)/2) / 0.75
    xs = sample_stationary(intro_model, n=200_000, rng=np.random.default_rng(1))
    se = xs.std() / math.sqrt(xs.size)
    assert abs(xs.mean() - math.sqrt(math.pi) / 2 / 0.75) < 4 * se
    with pytest.raises(InputError):
        sample_stationary(intro_model, trunc_tol=0.0)


def test_stationary_matches_burned_in_chain(intro_model, f2):
    t = [0.5, 1.0, 1.5, 2.0, 2.5]
    a = tail_log_estimate(intro_model, f2, t, 200_000, "series", seed=5)
    b = tail_log_estimate(intro_model, f2, t, 200_000, "recursion_burnin", burnin=60, seed=6)
    se = np.sqrt(a.stderr() ** 2 + b.stderr() ** 2)
    assert np.all(np.abs(a.prob_estimates - b.prob_estimates) < 4 * se)


def test_unbounded_support(intro_model):
    # the exponent model exp(-0.75 t^2) puts p = 1e-5 near t = 3.92
    t = math.sqrt(math.log(1e5) / 0.75)
    xs = sample_stationary(intro_model, n=10**6, rng=np.random.default_rng(2))
    assert xs.max() > t


def test_tail_estimate_flags_and_determinism(intro_model, f2):
    t = [1.0, 2.0, 3.0, 6.0]
    a = tail_log_estimate(intro_model, f2, t, 100_000, seed=11)
    b = tail_log_estimate(intro_model, f2, t, 100_000, seed=11)
    assert np.array_equal(a.hits, b.hits)
    assert a.floor_hit[-1] and not a.floor_hit[0]
    assert a.last_resolvable[0] in (2.0, 3.0)
    assert a.predicted == pytest.approx(0.75, abs=1e-9)
    rows = list(a.rows())
    assert rows[0]["t"] == 1.0 and rows[0]["n"] == 100_000
    with pytest.raises(InputError):
        tail_log_estimate(intro_model, f2, t, 1000, method="magic")


def test_counts_independent_of_worker_count(intro_model, f2):
    n = CHUNK + 5000
    t = [1.0, 2.0]
    a = tail_log_estimate(intro_model, f2, t, n, seed=3, workers=1)
    b = tail_log_estimate(intro_model, f2, t, n, seed=3, workers=4)
    assert np.array_equal(a.hits, b.hits)


def test_default_checkpoints():
    ck = default_checkpoints(1000, 10)
    assert ck[0] >= 10 and ck[-1] == 1000
    assert np.all(np.diff(ck) > 0)


def test_envelope_small(intro_model, f2):
    rep = envelope(intro_model, f2, 0.75, 20_000, 3, n_start=100, seed=1, workers=1)
    assert rep.running_max_ratio.shape == (3, rep.checkpoints.size)
    assert rep.nondecreasing()
    assert rep.predicted_limit == pytest.approx(0.75 ** -0.5)
    assert 0.5 < rep.median_final < 2.0
    again = envelope(intro_model, f2, 0.75, 20_000, 3, n_start=100, seed=1, workers=3)
    assert np.array_equal(rep.running_max_ratio, again.running_max_ratio)


@pytest.mark.parametrize("ls", [0.0, math.inf, -1.0])
def test_envelope_needs_finite_positive_lambda_star(intro_model, f2, ls):
    with pytest.raises(PreconditionError):
        envelope(intro_model, f2, ls, 1000, 2)


def test_envelope_bad_inputs(intro_model, f2):
    with pytest.raises(InputError):
        envelope(intro_model, f2, 0.75, 100, 1, n_start=500)
    with pytest.raises(InputError):
        envelope(intro_model, f2, 0.75, 100, 1, checkpoints=[5, 200])


def test_one_step(intro_model, f2):
    rep = one_step_tail(intro_model, f2, 0.75, [0.5, 1.0, 1.5, 2.0], 200_000, seed=4)
    assert rep.predicted == pytest.approx(0.75, abs=1e-9)
    # at moderate t the ratio still sits below its limit
    assert np.all(rep.ratios[~rep.floor_hit] < 1.05 * 0.75)
    zero = one_step_tail(intro_model, f2, 0.0, [1.0, 5.0], 10_000, seed=4)
    assert np.all(zero.ratios < 1e-3)
    with pytest.raises(InputError):
        one_step_tail(intro_model, f2, -1.0, [1.0], 1000)


def test_stochastic_monotonicity(intro_model):
    rep = stochastic_monotonicity_check(intro_model, [1, 2, 4, 8], 100_000, [0.5, 1.0, 1.5, 2.0, 2.5], seed=9)
    assert rep.passed, rep.violations
    assert rep.survival.shape == (5, 5)
    assert np.all(rep.survival[0] <= rep.survival[-1] + 0.01)
