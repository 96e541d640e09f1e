from __future__ import annotations

import logging
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symkl.linops import d_k
from symkl.trivial import (
    CycloPoly,
    a0_factor,
    a_infty_factor,
    b_factor,
    mk_coefficients,
    orbit_data,
    shift,
    trivial_factor,
    v_vector,
)


def _series(n: int, k: int, N: int) -> list[int]:
    # independent expansion via the Gaussian binomial [n+k choose k]_x times (1 - x^{n+1})
    num = [1] + [0] * N
    for j in range(n + 1, n + k + 1):
        num = [num[i] - (num[i - j] if i >= j else 0) for i in range(N + 1)]
    inv = [1] + [0] * N
    for j in range(2, k + 1):
        new = inv[:]
        for i in range(j, N + 1):
            new[i] += new[i - j]
        inv = new
    return [sum(num[i] * inv[s - i] for i in range(s + 1)) for s in range(N + 1)]


def test_mk_examples():
    assert mk_coefficients(1, 2) == [1, 0]
    assert mk_coefficients(1, 3) == [1, 0]  # window {0, 1}; m(1) = 0
    for n in range(1, 6):
        assert mk_coefficients(n, 1) == [1] + [0] * (n // 2)
    with pytest.raises(ValueError):
        mk_coefficients(0, 2)


@given(st.integers(1, 6), st.integers(1, 8))
def test_mk_matches_series(n, k):
    m = mk_coefficients(n, k)
    assert len(m) == k * n // 2 + 1
    assert m == _series(n, k, k * n // 2)
    assert all(c >= 0 for c in m)


def test_a0_examples():
    assert a0_factor(1, 3, 2).expand() == [1, -1]
    assert a0_factor(1, 2, 3).expand() == [1, -1]
    A = a0_factor(3, 4, 5)
    assert len(A.expand()) - 1 == A.degree == sum(mk_coefficients(3, 4))


def test_cyclopoly_expand():
    P = CycloPoly(2, ((2, 1, 1), (3, 1, 1)))
    assert P.expand() == [1, -12, 32]
    assert CycloPoly(3, ((1, -1, 2),)).expand() == [1, 6, 9]
    assert P.describe() == "(1 - 4T)(1 - 8T)"
    with pytest.raises(ValueError):
        CycloPoly(2, ((1, 1, 0),))


def test_orbit_examples():
    od = orbit_data(1, 2, 3)
    assert od.S == [(1, 1)] and od.a == 1 and od.b == 0 and od.c == 0
    od = orbit_data(1, 3, 3)
    assert sorted(od.S) == [(0, 3), (3, 0)] and od.a == 1 and od.b is None
    od = orbit_data(1, 3, 2)
    assert od.S == [] and od.a == 0


def test_v_vector_cancels_for_11():
    assert v_vector((1, 1)) == {}


def test_a_infty_examples():
    assert a_infty_factor(1, 3, 2).factor.expand() == [1]
    ai = a_infty_factor(2, 2, 2)
    assert ai.factor.expand() == [1, -4]
    assert a_infty_factor(1, 2, 3).factor.expand() == [1]


def test_a_infty_overlap_warning(caplog):
    # n = 3, k = 4: 4 | n+1 and 4 | k, so both printed conditions hold when 8 does not divide q-1
    with caplog.at_level(logging.WARNING):
        ai = a_infty_factor(3, 4, 3)
    assert ai.warnings and "second" in ai.warnings[0]
    assert ai.branch == "2(n+1) does not divide q-1; 4 | n+1 or 4 | k"
    assert any("both hold" in r.message for r in caplog.records)


def test_b_examples():
    assert b_factor(2, 2, 2).expand() == [1, -12, 32]
    assert b_factor(2, 2, 3).expand() == [1]
    assert b_factor(1, 2, 2).expand() == [1]


def test_cancellation_222():
    tf = trivial_factor(2, 2, 2)
    assert tf.cancellation() == [(2, 1)]
    P = tf.ratfunc()
    # A0 (1 - 2T)... / B with (1 - 4T) cancelled leaves the (1 - 8T) denominator
    assert P.den == (1, -8)


params = st.tuples(st.integers(1, 4), st.integers(1, 6), st.sampled_from([2, 3, 5, 7, 11]))


@given(params)
def test_orbit_invariants(nkp):
    n, k, p = nkp
    if math.comb(n + k, n) > 2000:
        return
    od = orbit_data(n, k, p)
    # #S_k equals the obstruction count
    assert len(od.S) == d_k(n, k, p)
    S = set(od.S)
    assert {shift(i) for i in S} == S
    # orbits partition S
    flat = [i for o in od.orbits for i in o]
    assert sorted(flat) == sorted(od.S) and len(set(flat)) == len(flat)
    if n % 2 == 1 and k % 2 == 0:
        for i in od.S:
            sign = -1 if i[n] % 2 else 1
            expect = {m: sign * c for m, c in v_vector(i).items()}
            assert dict(v_vector(shift(i))) == expect


@given(params)
def test_hypothesis_forces_trivial_a_infty(nkp):
    n, k, p = nkp
    if math.comb(n + k, n) > 2000 or d_k(n, k, p):
        return
    od = orbit_data(n, k, p)
    assert od.S == [] and od.a == 0
    ai = a_infty_factor(n, k, p, orbits=od)
    assert ai.factor.expand() == [1]
