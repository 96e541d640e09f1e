from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symkl.cyclotomic import CycInt
from symkl.linops import (
    CycVec,
    LinOp,
    compositions,
    cyclotomic_factors_mod_p,
    d_k,
    d_obstruction,
    elementary_from_power_sums,
    power_sums_from_elementary,
    r_poly,
    scan_prime_power,
    trace_from_power_sums,
)


def Z(x: int) -> CycInt:
    # Z[zeta_2] is Z, which makes CycInt a plain exact integer
    return CycInt.from_int(2, x)


# -- descriptors ------------------------------------------------------------------

def test_parse_and_name():
    op = LinOp.parse("ext:2 * sym:1")
    assert op.factors == (("ext", 2), ("sym", 1))
    assert op.total_degree == 3
    assert op.name == "ext:2*sym:1"
    assert LinOp.parse("sym:3").is_sym() == 3
    assert op.is_sym() is None
    for bad in ("sym", "foo:2", "sym:0", ""):
        with pytest.raises(ValueError):
            LinOp.parse(bad)


def test_ext_degree_bound():
    with pytest.raises(ValueError):
        r_poly(LinOp.parse("ext:4"), 2)
    with pytest.raises(ValueError):
        LinOp.parse("ext:3").index_count(1)


def test_r_poly_examples():
    assert r_poly(LinOp.sym(3), 1).coeffs == (1, 1, 1, 1)
    assert r_poly(LinOp.parse("ext:2"), 2).coeffs == (0, 1, 1, 1)
    for n in range(1, 6):
        assert r_poly(LinOp.sym(1), n).coeffs == (1,) * (n + 1)
    assert r_poly(LinOp.parse("tensor:2"), 1).coeffs == (1, 2, 1)


def _brute_r(op: LinOp, n: int) -> list[int]:
    # enumerate J directly: per factor, multisets / sets / tuples of {0..n}
    per = []
    for kind, deg in op.factors:
        if kind == "sym":
            per.append(list(itertools.combinations_with_replacement(range(n + 1), deg)))
        elif kind == "ext":
            per.append(list(itertools.combinations(range(n + 1), deg)))
        else:
            per.append(list(itertools.product(range(n + 1), repeat=deg)))
    weights = Counter(sum(sum(x) for x in combo) for combo in itertools.product(*per))
    top = max(weights)
    return [weights.get(w, 0) for w in range(top + 1)]


op_strategy = st.lists(st.tuples(st.sampled_from(["sym", "ext", "tensor"]), st.integers(1, 3)),
                       min_size=1, max_size=2)


@given(op_strategy, st.integers(1, 3))
def test_r_poly_matches_enumeration(factors, n):
    op = LinOp(tuple(factors))
    if any(k == "ext" and d > n + 1 for k, d in factors):
        return
    R = r_poly(op, n)
    assert list(R.coeffs) == _brute_r(op, n)
    assert R.at_one() == op.index_count(n)


@given(st.integers(1, 6), st.integers(1, 8))
def test_sym_count(n, k):
    assert r_poly(LinOp.sym(k), n).at_one() == math.comb(n + k, n)


def test_r_poly_product_rule():
    a, b = LinOp.parse("sym:2"), LinOp.parse("ext:2")
    prod = LinOp(a.factors + b.factors)
    ra, rb = r_poly(a, 2).coeffs, r_poly(b, 2).coeffs
    expect = np.convolve(ra, rb).tolist()
    while expect[-1] == 0:
        expect.pop()
    assert list(r_poly(prod, 2).coeffs) == expect


# -- traces -----------------------------------------------------------------------

def test_trace_examples():
    p1, p2 = Z(5), Z(13)  # eigenvalues 2, 3
    assert trace_from_power_sums(LinOp.sym(2), [p1, p2]) == Z(19)   # (25 + 13) / 2
    assert trace_from_power_sums(LinOp.parse("ext:2"), [p1, p2]) == Z(6)  # (25 - 13) / 2
    assert trace_from_power_sums(LinOp.sym(1), [p1]) == p1
    with pytest.raises(ValueError):
        trace_from_power_sums(LinOp.sym(3), [p1, p2])


def _brute_trace(op: LinOp, eig: list[int]) -> int:
    total = 1
    for kind, deg in op.factors:
        if kind == "sym":
            combos = itertools.combinations_with_replacement(eig, deg)
        elif kind == "ext":
            combos = itertools.combinations(eig, deg)
        else:
            combos = itertools.product(eig, repeat=deg)
        total *= sum(math.prod(c) for c in combos)
    return total


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=3), op_strategy)
def test_trace_matches_brute_force(eig, factors):
    op = LinOp(tuple(factors))
    if any(k == "ext" and d > len(eig) for k, d in factors):
        return
    need = max(d if k != "tensor" else 1 for k, d in factors)
    ps = [Z(sum(x**j for x in eig)) for j in range(1, need + 1)]
    assert trace_from_power_sums(op, ps) == Z(_brute_trace(op, eig))


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4))
def test_newton_round_trip(eig):
    deg = len(eig)
    ps = [Z(sum(x**j for x in eig)) for j in range(1, deg + 3)]
    e = elementary_from_power_sums(ps, deg, Z(1))
    # e_s is the s-th elementary symmetric function; exact divisions throughout
    for s in range(deg + 1):
        assert e[s] == Z(sum(math.prod(c) for c in itertools.combinations(eig, s)))
    assert power_sums_from_elementary(e, deg + 2, Z(0)) == ps


def test_cycvec_agrees_with_cycint():
    rng = np.random.default_rng(7)
    p = 5
    a = rng.integers(-20, 20, size=(6, p - 1))
    b = rng.integers(-20, 20, size=(6, p - 1))
    A, B = CycVec(p, a), CycVec(p, b)
    for i in range(6):
        x, y = CycInt(p, tuple(int(v) for v in a[i])), CycInt(p, tuple(int(v) for v in b[i]))
        assert (A * B).rows()[i] == (x * y).coeffs
        assert (A - B).rows()[i] == (x - y).coeffs
        assert A.conjugate(2).rows()[i] == x.conjugate(2).coeffs
    with pytest.raises(ArithmeticError):
        CycVec(p, np.ones((1, p - 1), dtype=np.int64)).exact_div(2)


def test_cycvec_widens_instead_of_overflowing():
    p = 3
    big = CycVec(p, np.full((2, 2), 2**40, dtype=np.int64))
    sq = big * big
    assert sq.data.dtype == object
    x = CycInt(p, (2**40, 2**40))
    assert sq.rows()[0] == (x * x).coeffs


# -- obstruction counts -------------------------------------------------------------

def test_compositions():
    assert list(compositions(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert len(list(compositions(5, 4))) == math.comb(8, 3)


def test_d1_vanishes():
    for n in range(1, 7):
        for p in (2, 3, 5, 7, 11, 13):
            if (n + 1) % p:
                assert d_k(n, 1, p) == 0


def test_d_examples():
    ob = d_obstruction(LinOp.sym(3), 1, 3)
    assert ob.count == 2 and sorted(ob.witnesses) == [(0, 3), (3, 0)]
    assert d_k(2, 2, 2) == 3
    for p in (5, 11):
        ob = d_obstruction(LinOp.sym(5), 5, p)
        assert ob.count >= 1
        assert (1, 1, 1, 0, 2, 0) in ob.witnesses


def test_scan_examples():
    assert scan_prime_power(1, 3, 20) == [3]
    assert scan_prime_power(2, 2, 20) == [2]
    assert scan_prime_power(1, 1, 50) == []


def test_cyclotomic_factors():
    # Phi_3 mod 7 splits (7 = 1 mod 3); mod 5 it stays irreducible
    assert len(cyclotomic_factors_mod_p(3, 7)) == 2
    assert cyclotomic_factors_mod_p(3, 5) == [[1, 1, 1]]
    assert cyclotomic_factors_mod_p(5, 11) == sorted(cyclotomic_factors_mod_p(5, 11))


def _brute_sym_count(n: int, k: int, p: int, g: list[int]) -> int:
    from symkl import polyfp
    powers = [polyfp.powmod([0, 1], j, g, p) for j in range(n + 1)]
    count = 0
    for comp in compositions(k, n + 1):
        acc = [0] * (len(g) - 1)
        for i, pw in zip(comp, powers):
            for c, v in enumerate(pw):
                acc[c] = (acc[c] + i * v) % p
        count += not any(acc)
    return count


@given(st.integers(1, 4), st.integers(1, 6), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_obstruction_invariance_and_brute_force(n, k, p):
    ob = d_obstruction(LinOp.sym(k), n, p)
    assert ob.invariant
    for idx, g in enumerate(ob.all_factors):
        assert _brute_sym_count(n, k, p, g) == ob.counts_by_factor[idx]


@given(st.sampled_from(["ext:2", "tensor:2", "sym:2*ext:1", "ext:2*tensor:1"]),
       st.integers(1, 3), st.sampled_from([2, 3, 5, 7]))
def test_general_obstruction_invariance(text, n, p):
    op = LinOp.parse(text)
    try:
        op.check_dimension(n)
    except ValueError:
        return
    assert d_obstruction(op, n, p).invariant


def test_cycvec_exact_div_on_wide_entries():
    big = CycVec(3, np.array([[3**41, -(3**41)]], dtype=object))
    assert big.exact_div(3**20).rows() == [(3**21, -(3**21))]
    with pytest.raises(ArithmeticError):
        big.exact_div(2)
