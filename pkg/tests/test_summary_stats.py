import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gripforce.errors import EmptyInput, SingletonSem
from gripforce.stats import summary_stats


def test_eight_ten_twelve():
    s = summary_stats([8, 10, 12])
    assert s.n == 3
    assert s.mean == 10.0
    # sd = 2 by hand, so sem = 2 / sqrt(3)
    assert s.sem == pytest.approx(2 / math.sqrt(3), rel=1e-12)
    assert s.sem == pytest.approx(1.1547, abs=1e-4)


@pytest.mark.parametrize("c", [0.0, 2.5, 812.0, -3.75])
def test_constant(c):
    s = summary_stats([c] * 4)
    assert s.mean == c
    assert s.sem == 0.0


def test_singleton():
    s = summary_stats([5])
    assert s.mean == 5
    with pytest.raises(SingletonSem):
        s.sem
    assert s.to_dict() == {"n": 1, "mean": 5.0, "sem": None}


def test_empty():
    with pytest.raises(EmptyInput):
        summary_stats([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_matches_direct_formula(vals):
    s = summary_stats(vals)
    n = len(vals)
    mean = sum(vals) / n
    sd = math.sqrt(sum((v - mean) ** 2 for v in vals) / (n - 1))
    assert s.mean == pytest.approx(mean, rel=1e-9, abs=1e-6)
    assert s.sem == pytest.approx(sd / math.sqrt(n), rel=1e-7, abs=1e-6)
    assert s.sem >= 0
