from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from ringdec.errors import LpSolverError
from ringdec.simplex import StandardFormLP


def toy():
    # max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3 (slacks s1..s3)
    a = [[1, 1, 1, 0, 0], [1, 3, 0, 1, 0], [1, 0, 0, 0, 1]]
    b = [4, 6, 3]
    c = [-3, -2, 0, 0, 0]
    return a, b, c


@pytest.mark.parametrize("exact", [True, False])
def test_toy_lp(exact):
    a, b, c = toy()
    res = StandardFormLP(a, b, exact=exact).minimize(c)
    assert res.status == "optimal"
    assert res.objective == -11
    assert [float(v) for v in res.x[:2]] == [3.0, 1.0]


def test_exact_values_are_fractions():
    a = [[2, 1, 1, 0], [1, 3, 0, 1]]
    res = StandardFormLP(a, [3, 4], exact=True).minimize([-1, -1, 0, 0])
    assert res.objective == Fraction(-2)
    assert res.x[0] == Fraction(1) and res.x[1] == Fraction(1)
    res = StandardFormLP(a, [3, 5], exact=True).minimize([-1, -1, 0, 0])
    assert res.objective == Fraction(-11, 5)


def test_infeasible():
    with pytest.raises(LpSolverError):
        StandardFormLP([[1, 1]], [-1], exact=True).minimize([1, 1])


def test_unbounded():
    res = StandardFormLP([[1, -1]], [1], exact=True).minimize([-1, 0])
    assert res.status == "unbounded"


def test_redundant_rows_dropped():
    a = [[1, 1, 0], [2, 2, 0], [0, 1, 1]]
    lp = StandardFormLP(a, [1, 2, 1], exact=True)
    res = lp.minimize([1, 2, 0])
    assert res.objective == 1
    assert lp.redundant_rows


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = 3, 6
    a = rng.integers(-3, 4, size=(m, n))
    x0 = rng.integers(0, 3, size=n)
    b = a @ x0          # feasible by construction
    c = rng.integers(-5, 6, size=n)
    bounds_row = [1] * n  # keep it bounded: sum x <= 10 via slack
    a_full = np.vstack([np.hstack([a, np.zeros((m, 1), dtype=int)]), bounds_row + [1]])
    b_full = list(b) + [max(10, int(x0.sum()))]
    c_full = list(c) + [0]
    ref = linprog(c_full, A_eq=a_full, b_eq=b_full, bounds=(0, None), method="highs")
    for exact in (True, False):
        res = StandardFormLP(a_full.tolist(), b_full, exact=exact).minimize(c_full)
        assert res.status == "optimal"
        assert abs(float(res.objective) - ref.fun) < 1e-7
