
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import log_series, make_series
from oracles import supervised_pairs_brute
from wincast.errors import WindowOutOfRange
from wincast.series import build_supervised, log_transform, window_at


def test_log_transform_examples():
    assert np.array_equal(log_transform(make_series([1, 1, 1])).values, [0.0, 0.0, 0.0])
    v = log_transform(make_series([1, 3])).values
    assert v[0] == 0.0
    assert v[1] == pytest.approx(1.0986122886681098, abs=1e-15)


@given(st.lists(st.integers(1, 10 ** 9), min_size=1, max_size=40))
def test_log_round_trip(counts):
    v = log_transform(make_series(counts)).values
    assert np.all(v >= 0)
    np.testing.assert_allclose(np.exp(v), counts, rtol=1e-12)


def test_log_series_is_read_only():
    ls = log_series([0, 1, 2])
    with pytest.raises(ValueError):
        ls.values[0] = 5.0


def test_window_at():
    ls = log_series([0, 1, 2, 3])
    assert list(window_at(ls, 3, 2)) == [2, 3]
    assert list(window_at(ls, 3, 4)) == [0, 1, 2, 3]
    with pytest.raises(WindowOutOfRange):
        window_at(ls, 0, 2)
    with pytest.raises(WindowOutOfRange):
        window_at(ls, 4, 1)


def test_supervised_examples():
    ls = log_series(range(5))
    assert build_supervised(ls, 2, 1).count == 3
    assert build_supervised(ls, 2, 7).count == 0
    s = build_supervised(ls, 2, 2)
    assert s.inputs.tolist() == [[0, 1], [1, 2]]
    assert s.targets.tolist() == [3, 4]
    assert s.end_indices.tolist() == [1, 2]


def test_supervised_max_pairs_keeps_recent():
    s = build_supervised(log_series(range(10)), 3, 1, max_pairs=2)
    assert s.targets.tolist() == [8, 9]


def test_count_formula_exhaustive():
    for N in range(1, 21):
        vals = [float(i * i) for i in range(N)]
        ls = log_series(vals)
        for w in range(1, N + 2):
            for tau in range(1, N + 2):
                s = build_supervised(ls, w, tau)
                brute = supervised_pairs_brute(vals, w, tau)
                assert s.count == len(brute) == max(N - w - tau + 1, 0)
                for (x, t), xi, ti in zip(brute, s.inputs.tolist(), s.targets.tolist()):
                    assert x == xi and t == ti


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 20), min_size=2, max_size=40), st.integers(1, 10), st.integers(1, 10))
def test_pairs_are_contiguous_and_causal(vals, w, tau):
    s = build_supervised(log_series(vals), w, tau)
    for i in range(s.count - 1):
        assert np.array_equal(s.inputs[i, 1:], s.inputs[i + 1, :-1])
    for x, t, m in zip(s.inputs, s.targets, s.end_indices):
        assert x[-1] == vals[m] and t == vals[m + tau]
        assert m + tau < len(vals)
