import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sirpf.metrics import TrajectoryRecord, rms_discrepancy, rmsd, rmse
from sirpf.models import ungm

arrays = st.lists(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
                  min_size=1, max_size=40)


def test_rmse_spot_values():
    assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert rmse([2.0, 3.0], [1.0, 2.0]) == pytest.approx(1.0)
    assert rmse([3.0, 4.0], [0.0, 0.0]) == pytest.approx(math.sqrt(12.5))
    assert rmse([3.0, 4.0], [0.0, 0.0]) == pytest.approx(3.5355339, abs=5e-8)


def test_rmsd_spot_values():
    m = ungm()
    assert rmsd([0.0, 0.2], [0.0, 2.0], m) == 0.0
    assert rmsd([1.0, 1.2], [0.0, 2.0], m) == pytest.approx(1.0)
    assert rmsd([0.2 + 3.0], [2.0], m) == pytest.approx(3.0)


def test_rms_discrepancy_matches_point_rmsd_on_predictions():
    m = ungm()
    estimates = np.array([0.5, -1.5, 2.0])
    observations = np.array([0.3, 0.1, 0.4])
    assert rms_discrepancy(observations, m.observe(estimates, 0.0)) == \
        pytest.approx(rmsd(observations, estimates, m))


def test_length_mismatch_and_empty_rejected():
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        rmse([], [])
    with pytest.raises(ValueError):
        rmsd([1.0, 2.0], [1.0], ungm())


@given(arrays, arrays)
def test_rmse_symmetric_and_nonnegative(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    value = rmse(a, b)
    assert value >= 0.0
    assert value == rmse(b, a)
    if np.array_equal(np.asarray(a), np.asarray(b)):
        assert value == 0.0


def test_metrics_zero_only_at_pointwise_match():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([1.0, 2.0], [1.0, 2.5]) > 0.0
    m = ungm()
    assert rmsd([m.observe(3.0, 0.0)], [3.0], m) == 0.0
    assert rmsd([m.observe(3.0, 0.0) + 0.1], [3.0], m) > 0.0


@given(arrays, st.randoms())
def test_metrics_invariant_under_consistent_permutation(a, rng):
    m = ungm()
    b = [x / 2 + 1 for x in a]
    order = list(range(len(a)))
    rng.shuffle(order)
    pa, pb = [a[i] for i in order], [b[i] for i in order]
    assert rmse(pa, pb) == pytest.approx(rmse(a, b), rel=1e-9)
    assert rmsd(pa, pb, m) == pytest.approx(rmsd(a, b, m), rel=1e-9)


def test_trajectory_record_validates_lengths():
    TrajectoryRecord([1.0], [2.0], [3.0])
    with pytest.raises(ValueError):
        TrajectoryRecord([1.0, 2.0], [2.0], [3.0])
    with pytest.raises(ValueError):
        TrajectoryRecord([], [], [])
