import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilinear_manin.enumeration import count_height
from trilinear_manin.hyperbolic import (
    BBParams,
    FitError,
    LeadingFit,
    ShellCounter,
    fit_leading,
    hyperbolic_partial_sums,
    spot_check_conditions,
    sum_hyperbolic,
)

from . import oracles


def test_sum_examples():
    one = lambda l, m, n: 1
    assert sum_hyperbolic(one, 8) == 38 == oracles.naive_d3_sum(8)
    assert sum_hyperbolic(one, 1) == 1


@settings(max_examples=30, deadline=None)
@given(table=st.lists(st.integers(-5, 5), min_size=64, max_size=64), P=st.integers(1, 30),
       perm=st.permutations([0, 1, 2]))
def test_loop_order_invariance(table, P, perm):
    h = lambda l, m, n: table[(l * 7 + m * 3 + n) % 64]
    permuted = lambda a, b, c: h(*[(a, b, c)[i] for i in np.argsort(perm)])
    lhs = sum_hyperbolic(h, P)
    # Summing over the permuted index order visits the same triples.
    rhs = sum(permuted(*[t[i] for i in perm]) for t in itertools.product(range(1, P + 1), repeat=3)
              if t[0] * t[1] * t[2] <= P)
    assert lhs == rhs


def test_partial_sums_match_loops():
    S = hyperbolic_partial_sums(lambda l, m, n: l + 2 * m * n, 40)
    for P in (1, 7, 23, 40):
        assert S[P] == sum_hyperbolic(lambda l, m, n: l + 2 * m * n, P)
    with pytest.raises(TypeError):
        hyperbolic_partial_sums(lambda l, m, n: l * 0.5, 5)


def test_fit_families():
    P = [1000, 2000, 5000, 10**4, 2 * 10**4, 5 * 10**4, 10**5]
    t0 = time.perf_counter()
    one = fit_leading(lambda l, m, n: np.ones_like(l), P, 1.0)
    quad = fit_leading(lambda l, m, n: 8 * l * m * n, P, 2.0)
    assert time.perf_counter() - t0 < 30
    assert abs(one.C_hat - 1) <= 0.15
    assert abs(quad.C_hat - 1) <= 0.15
    assert LeadingFit.from_json(one.to_json()).C_hat == one.C_hat


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_leading([1, 2], [2, 3], 1.0)
    with pytest.raises(ValueError):
        fit_leading([1, 2, 3], [3, 2, 5], 1.0)
    big = 10**15
    with pytest.raises(FitError):
        fit_leading([1, 2, 3], [big, big + 1, big + 2], 1.0)


def test_params_validation():
    BBParams(beta=1.0)
    for kw in ({"beta": 0}, {"beta": 1, "alpha": 0}, {"beta": 1, "delta": -1}, {"beta": float("nan")}):
        with pytest.raises(ValueError):
            BBParams(**kw)


def test_shell_sum_equals_height_count(generic_n1):
    for f in generic_n1[:2]:
        h = ShellCounter(f)
        for B in (1, 6, 16):
            assert sum_hyperbolic(h, B) == count_height(f, B).count


def test_spot_check(generic_n1):
    f = generic_n1[0]
    rep = spot_check_conditions(f, BBParams(beta=1.0), budget=6, sigma=70.0)
    assert set(rep.c1) == {1, 2}
    assert all(len(v) == 2 for v in rep.c1.values())
    assert rep.box_ratio > 0 and rep.sigma == 70.0
    assert "c1_deviation" in rep.to_json()


def test_spot_check_zero_row(generic_n1):
    class ZeroRow:
        def __call__(self, l, m, n):
            return 0 if l == 2 else l * m * n

    rep = spot_check_conditions(generic_n1[0], BBParams(beta=1.0), budget=4, h=ZeroRow())
    assert rep.c1[2] == [0.0, 0.0]
    assert rep.c1_deviation[2] == 0.0
