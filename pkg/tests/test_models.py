import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sirpf.models import (lg_observe, lg_transition, linear_gaussian,
                          make_model, ungm, ungm_observe, ungm_transition)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_ungm_transition_spot_values():
    assert ungm_transition(0.0, 1, 0.0) == pytest.approx(8.0)
    assert ungm_transition(1.0, 1, 0.0) == pytest.approx(21.0)
    assert ungm_transition(-1.0, 1, 0.0) == pytest.approx(-5.0)
    assert ungm_transition(0.0, 2, 1.5) == pytest.approx(8 * math.cos(1.2) + 1.5)
    assert ungm_transition(0.0, 2, 1.5) == pytest.approx(4.398862, abs=5e-7)


def test_ungm_observe_spot_values():
    assert ungm_observe(2.0, 0.0) == pytest.approx(0.2)
    assert ungm_observe(-2.0, 0.0) == pytest.approx(0.2)
    assert ungm_observe(0.0, 0.3) == pytest.approx(0.3)


def test_linear_gaussian_spot_values():
    assert lg_transition(1.0, 5, 0.0, a=0.9) == pytest.approx(0.9)
    assert lg_observe(2.0, 0.5, c=1.0) == pytest.approx(2.5)
    assert lg_transition(0.0, 1, 0.7) == 0.7


@given(finite)
def test_ungm_odd_part_cancels_at_first_step(x):
    total = ungm_transition(x, 1, 0.0) + ungm_transition(-x, 1, 0.0)
    assert total == pytest.approx(16.0, abs=1e-8 * max(1.0, abs(x)))


@given(finite)
def test_ungm_observation_is_even(x):
    assert ungm_observe(x, 0.0) == ungm_observe(-x, 0.0)


@given(finite, st.integers(min_value=1, max_value=1000), finite, finite)
def test_transition_noise_is_additive(x, k, w1, w2):
    for fn in (ungm_transition, lg_transition):
        diff = fn(x, k, w1) - fn(x, k, w2)
        assert diff == pytest.approx(w1 - w2, abs=1e-7 * max(1.0, abs(x)))


def test_transition_broadcasts_over_arrays():
    xs = np.array([0.0, 1.0, -1.0])
    out = ungm_transition(xs, 1, np.zeros(3))
    assert np.allclose(out, [8.0, 21.0, -5.0])


def test_make_model_by_name():
    m = make_model("ungm", q_true=2.0)
    assert m.q_true == 2.0
    assert m.transition is ungm_transition
    lg = make_model("linear-gaussian")
    assert lg.transition(1.0, 1, 0.0) == pytest.approx(0.9)
    with pytest.raises(ValueError, match="unknown model"):
        make_model("pendulum")


def test_model_validation():
    with pytest.raises(ValueError):
        ungm(q_true=-1.0)
    with pytest.raises(ValueError):
        ungm(r=-0.5)
    with pytest.raises(ValueError):
        linear_gaussian(init_var=-1.0)
