import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rankdiff.errors import ConditionViolated
from rankdiff.types import (DriftSpec, PointSequence, SpacingSample, WeightSequence, alpha_vector, atlas,
                            check_stationarity_condition, gravity, metric_d, metric_dprime, require_stationary,
                            top_push, two_block)

finite = st.floats(-50, 50, allow_nan=False)


def test_atlas_alpha_is_linear():
    n, eta_n = 10, 5.0
    assert np.allclose(alpha_vector(atlas(n, eta_n)), np.arange(1, n) * eta_n / n)


def test_gravity_alpha_closed_form():
    n, eta_n = 9, 1.5
    k = np.arange(1, n)
    assert np.allclose(alpha_vector(gravity(n, eta_n)), eta_n * k * (n - k) / n)


def test_top_push_alpha():
    n = 50
    k = np.arange(1, n)
    assert np.allclose(alpha_vector(top_push(n)), (n - k) / (4 * n))


@pytest.mark.parametrize("n", [256, 257, 1024])
def test_two_block_shape(n):
    d = two_block(n, 0.25).deltas
    top = math.floor(n ** 0.25)
    assert np.all(d[:top] == -0.25)
    assert np.all(d[top:n // 2] == -3.0)
    assert np.allclose(d, -d[::-1])
    assert check_stationarity_condition(two_block(n, 0.25))


def test_zero_drift_violates_condition():
    spec = DriftSpec(np.zeros(4))
    assert not check_stationarity_condition(spec)
    with pytest.raises(ConditionViolated) as err:
        require_stationary(spec)
    assert err.value.index == 1
    assert "alpha_k > 0 for all 1 <= k <= n-1" in str(err.value)


def test_first_failing_index_is_reported():
    # alpha = (1, 1, -1)
    spec = DriftSpec(np.array([-1.0, 0.0, 2.0, -1.0]))
    with pytest.raises(ConditionViolated) as err:
        require_stationary(spec)
    assert err.value.index == 3


@given(arrays(float, st.integers(2, 30), elements=finite))
def test_alpha_is_partial_sum_of_gaps(deltas):
    # the full sum of edge gaps is zero, so alpha_n would vanish
    spec = DriftSpec(deltas)
    gaps = spec.edge_gaps()
    alpha = alpha_vector(spec)
    assert alpha.size == spec.n - 1
    assert abs(gaps.sum()) < 1e-9 * max(1.0, np.abs(deltas).sum())
    assert check_stationarity_condition(spec) == bool(np.all(alpha > 0))


def test_driftspec_rejects_bad_input():
    for bad in ([1.0], [[1.0, 2.0]], [0.0, np.nan]):
        with pytest.raises(ValueError):
            DriftSpec(np.array(bad))


def test_driftspec_is_immutable():
    spec = atlas(3, 1.0)
    with pytest.raises(ValueError):
        spec.deltas[0] = 1.0


class TestWeightSequence:
    def test_renormalizes_small_error(self):
        w = WeightSequence([0.6, 0.4 + 1e-10])
        assert w.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_large_error(self):
        with pytest.raises(ValueError):
            WeightSequence([0.6, 0.3])

    @pytest.mark.parametrize("bad", [[0.4, 0.6], [1.2, -0.2], [np.inf, 0.0], []])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            WeightSequence(bad)

    def test_top_pads(self):
        w = WeightSequence([0.7, 0.3])
        assert list(w.top(4)) == [0.7, 0.3, 0.0, 0.0]
        assert len(w) == 2 and w[0] == 0.7


def test_spacing_from_positions():
    s = SpacingSample.from_positions([0.0, 3.0, 1.0])
    assert list(s.y) == [2.0, 1.0]
    assert s.n == 3
    with pytest.raises(ValueError):
        SpacingSample(np.array([1.0, -0.1]))


def test_point_sequence_padding():
    p = PointSequence(np.array([2.0, 1.0]))
    assert list(p.padded(3)) == [2.0, 1.0, -np.inf]
    with pytest.raises(ValueError):
        PointSequence(np.array([1.0, 2.0]))


def test_metric_d_conventions():
    a = PointSequence(np.array([0.0]))
    b = PointSequence(np.array([0.5, 0.0]))
    # first term 0.5/2, second: finite vs -inf clamps to 1 -> 1/4
    assert metric_d(a, b) == pytest.approx(0.25 + 0.25)
    assert metric_d(a, a) == 0.0


points = arrays(float, st.integers(0, 12), elements=finite).map(lambda x: PointSequence(np.sort(x)[::-1]))


@given(points, points, points)
def test_metric_d_is_a_metric(a, b, c):
    assert metric_d(a, b) == pytest.approx(metric_d(b, a))
    assert 0 <= metric_d(a, b) <= 1
    assert metric_d(a, c) <= metric_d(a, b) + metric_d(b, c) + 1e-12


weights = arrays(float, st.integers(1, 12), elements=st.floats(0.01, 1.0)).map(
    lambda x: WeightSequence(np.sort(x / x.sum())[::-1]))


@given(weights, weights)
def test_dprime_bounds(a, b):
    assert 0 <= metric_dprime(a, b) <= 2 + 1e-12
    assert metric_dprime(a, a) == 0
