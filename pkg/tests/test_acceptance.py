"""Acceptance battery: ten criteria, each recorded as one pass/fail line.

The lines are printed in the terminal summary (see conftest.py).  Criteria
2-4 are checked on the full L-function, whose degree and Newton polygon the
stated numbers describe; the quotient L / P is reported alongside.
"""

from __future__ import annotations

import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from symkl import polyfp
from symkl.cache import Cache
from symkl.cyclotomic import CycInt, is_rational_integer
from symkl.expsums import (
    all_fibers_convolution,
    batch_power_sums,
    fiber_rows,
    fiber_sum_naive,
    naive_rows,
)
from symkl.fiber import fiber_checks, fiber_polynomial
from symkl.fields import build_dlog, embed, embedding_with_root, make_field
from symkl.lfunction import (
    assemble,
    closed_point_series,
    exp_series,
    fiber_traces,
    log_coefficients,
    poly_divmod_q,
    poly_mul,
    reconstruct,
)
from symkl.linops import CycVec, LinOp, d_k, d_obstruction, elementary_from_power_sums, r_poly
from symkl.polygons import (
    Polygon,
    hodge_numbers,
    hodge_polygon,
    lies_on_or_above,
    lower_hull,
    newton_polygon,
)
from symkl.redcoh import coker_dimensions, constant_basis, injectivity_report
from symkl.trivial import trivial_factor

BATTERY = [(1, 3, 2, 1), (1, 5, 2, 1), (1, 3, 5, 1), (2, 2, 3, 1)]  # (n, k, p, a)
EXPECTED_DEGREES = [2, 3, 2, 2]
SEED = 20240531
ORACLE_BUDGET = int(os.environ.get("SYMKL_ORACLE_BUDGET", 2**24))


def record(num: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[num] = f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"


@pytest.fixture(scope="module")
def battery(tmp_path_factory):
    cache = Cache(tmp_path_factory.mktemp("acceptance-cache"))
    t0 = time.perf_counter()
    out = {}
    for n, k, p, a in BATTERY:
        out[(n, k, p, a)] = assemble(make_field(p, a), n, LinOp.sym(k), cache=cache)
    return out, time.perf_counter() - t0


def _trim(v):
    v = list(v)
    while v and v[-1] == 0:
        v.pop()
    return v


# -- 1 ----------------------------------------------------------------------------------

def test_criterion_01_fiber_exactness():
    t0 = time.perf_counter()
    F2 = make_field(2, 1)
    f = fiber_polynomial(F2, F2.one, 1)
    rep = fiber_checks(f)
    elapsed = time.perf_counter() - t0
    root2 = math.sqrt(2)
    moduli_ok = all(abs(m - root2) <= 1e-9 for m in rep.moduli)
    ok = (f.integer_coeffs() == [1, 1, 2] and rep.slopes == [0, 1] and moduli_ok
          and len(rep.moduli) == 2 and elapsed < 1.0)
    record(1, "fiber exactness", ok,
           f"coeffs {f.integer_coeffs()}, slopes {[str(x) for x in rep.slopes]}, "
           f"max |root|-sqrt2 {max(abs(m - root2) for m in rep.moduli):.1e}, {elapsed:.3f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------------------

def test_criterion_02_degree_formula(battery):
    table, elapsed = battery
    ok = elapsed < 300
    parts = []
    for (n, k, p, a), want in zip(BATTERY, EXPECTED_DEGREES):
        A = table[(n, k, p, a)]
        d = d_k(n, k, p)
        integral = A.L.is_polynomial and all(isinstance(c, int) for c in A.L.num)
        deg = A.L.degree[0]
        m_ok = A.M is not None and A.M.is_polynomial
        ok &= d == 0 and integral and deg == want == math.comb(n + k, n) // (n + 1) and m_ok
        parts.append(f"({n},{k},{p}) deg L={deg} [deg L/P={A.M.degree[0] if m_ok else '?'}]")
    record(2, "degree formula", ok, ", ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


# -- 3 ----------------------------------------------------------------------------------

def test_criterion_03_newton_above_hodge(battery):
    table, _ = battery
    ok = True
    parts = []
    for n, k, p, a in BATTERY:
        L = table[(n, k, p, a)].L
        hd = hodge_numbers(r_poly(LinOp.sym(k), n).coeffs, n)
        cmp = lies_on_or_above(newton_polygon(L.num, p, a), hodge_polygon(hd))
        exact = all(isinstance(m, Fraction) for m in cmp.margins)
        ok &= cmp.verdict is True and exact
        parts.append(f"({n},{k},{p}) margins {[str(m) for m in cmp.margins]}")
    record(3, "Newton on or above Hodge", ok, "; ".join(parts))
    assert ok


# -- 4 ----------------------------------------------------------------------------------

def test_criterion_04_sharpness(battery):
    table, _ = battery
    L = table[(1, 3, 2, 1)].L
    NP = newton_polygon(L.num, 2)
    want = ((0, 0), (1, 0), (2, 2))
    ok = NP.vertices == tuple((Fraction(x), Fraction(y)) for x, y in want)
    record(4, "sharpness at p=2, k odd", ok, f"NP(L) vertices {NP.to_json()}")
    assert ok


# -- 5 ----------------------------------------------------------------------------------

def test_criterion_05_integrality(battery):
    table, _ = battery
    ok = True
    parts = []
    for n, k, p, a in BATTERY:
        A = table[(n, k, p, a)]
        F, op = make_field(p, a), LinOp.sym(k)
        for m, c in enumerate(A.c, start=1):
            route = A.diagnostics["routes"][m - 1]
            total = fiber_traces(F, m, n, op, route).total()
            ok &= is_rational_integer(CycInt(p, tuple(total))) == c
        series_ok = exp_series(A.c) == A.series and all(isinstance(x, int) for x in A.series.coeffs)
        stable = (A.stable and A.series.D == A.D + 2
                  and reconstruct(A.series.truncate(A.D), *A.bounds) == reconstruct(A.series, *A.bounds))
        ok &= series_ok and stable
        parts.append(f"({n},{k},{p}) c_1..c_{len(A.c)} integral, D={A.D}->{A.D + 2} stable={stable}")
    record(5, "integrality and stability", ok, "; ".join(parts))
    assert ok


# -- 6 ----------------------------------------------------------------------------------

def test_criterion_06_trivial_factor(battery):
    table, _ = battery
    ok = True
    parts = []
    for n, k, p, a in BATTERY:
        A = table[(n, k, p, a)]
        _, rem = poly_divmod_q(poly_mul(A.L.num, A.P.den), poly_mul(A.L.den, A.P.num))
        tf = trivial_factor(n, k, p, a)
        empty = d_k(n, k, p) == 0 and tf.orbits.S == [] and tf.a_infty.expand() == [1]
        ok &= not any(rem) and empty
        parts.append(f"({n},{k},{p}) L/P={A.M}")
    tf = trivial_factor(2, 2, 2)
    A = assemble(make_field(2, 1), 2, LinOp.sym(2))
    B_ok = tf.b.expand() == poly_mul([1, -4], [1, -8])
    cancel = tf.cancellation() == [(2, 1)] and A.P.den == (1, -8) and A.L.den == (1, -8)
    _, rem = poly_divmod_q(poly_mul(A.L.num, A.P.den), poly_mul(A.L.den, A.P.num))
    ok &= B_ok and cancel and not any(rem)
    parts.append(f"(2,2,2) B={tf.b.describe()}, A_infty={tf.a_infty.describe()}, P={A.P}, L={A.L}")
    record(6, "trivial-factor consistency", ok, "; ".join(parts))
    assert ok


# -- 7 ----------------------------------------------------------------------------------

def test_criterion_07_obstruction_counts():
    primes = [p for p in range(2, 14) if polyfp.is_prime(p)]
    cases = 0
    ok = True
    invariant = True
    for n in range(1, 7):
        for p in primes:
            if (n + 1) % p:
                ob = d_obstruction(LinOp.sym(1), n, p)
                ok &= ob.count == 0
                invariant &= ob.invariant
                cases += 1
    ob3 = d_obstruction(LinOp.sym(3), 1, 3)
    ob2 = d_obstruction(LinOp.sym(2), 2, 2)
    ok &= ob3.count == 2 and ob2.count == 3
    invariant &= ob3.invariant and ob2.invariant
    wit = []
    for p in (5, 11):
        ob = d_obstruction(LinOp.sym(5), 5, p)
        ok &= ob.count >= 1 and (1, 1, 1, 0, 2, 0) in ob.witnesses
        invariant &= ob.invariant
        wit.append(f"d_5(5,{p})={ob.count} over {len(ob.all_factors)} factor(s)")
    ok &= invariant
    record(7, "obstruction counts", ok,
           f"d_1=0 on {cases} cases; d_3(1,3)={ob3.count}; d_2(2,2)={ob2.count}; "
           + "; ".join(wit) + f"; factor-invariant={invariant}")
    assert ok


# -- 8 ----------------------------------------------------------------------------------

def test_criterion_08_reduced_cohomology():
    inj = injectivity_report(1, 3, 2)
    dims = _trim(coker_dimensions(1, 3, 2))
    basis = constant_basis(1, 3, 2)
    ok = inj.injective and dims == [1, 0, 1] and basis == [(3, 0), (1, 2)]
    ok &= sum(dims) == 2 == math.comb(4, 1) // 2
    neg = [injectivity_report(1, 2, p).injective for p in (2, 3, 5, 7, 11)]
    neg.append(injectivity_report(1, 3, 3).injective)
    ok &= not any(neg) and d_k(1, 3, 3) != 0 and all(d_k(1, 2, p) for p in (2, 3, 5, 7, 11))
    graded = []
    for n, k, p, _ in BATTERY:
        hd = hodge_numbers(r_poly(LinOp.sym(k), n).coeffs, n)
        if hd.exact:
            got = _trim(coker_dimensions(n, k, p))
            ok &= got == list(hd.h)
            graded.append(f"({n},{k},{p}) {got}")
    record(8, "reduced cohomology", ok,
           f"(1,3,F_2) injective, dims {dims}, B_3 {basis}; non-injective for (1,2,p) and (1,3,F_3); "
           f"dims = Q(T): " + ", ".join(graded))
    assert ok


# -- 9 ----------------------------------------------------------------------------------

def _prime_powers(limit: int) -> list[tuple[int, int, int]]:
    out = []
    for p in range(2, limit + 1):
        if polyfp.is_prime(p):
            a = 1
            while p**a <= limit:
                out.append((p**a, p, a))
                a += 1
    return sorted(out)


CLOSED_POINT_CASES = [(q, n, k) for q in (2, 3, 4) for n, ks in ((1, (1, 2, 3)), (2, (2,)), (3, (1,)))
                      for k in ks]
CLOSED_POINT_FIELD_BUDGET = 2**20


@pytest.mark.xfail(strict=True, reason="naive enumeration of every field of size <= 4096 at n = 2, 3 "
                   "is beyond reach; the covered part is checked and the rest reported")
def test_criterion_09_oracle_equivalence():
    checked = mismatched = 0
    uncovered = []
    for n in (1, 2, 3):
        for q, p, a in _prime_powers(4096):
            cost = (q - 1) ** (n + 1)
            if cost > ORACLE_BUDGET:
                uncovered.append((q, n, cost))
                continue
            Q = build_dlog(make_field(p, a))
            codes = np.arange(1, q, dtype=np.int64)
            conv = all_fibers_convolution(Q, n)[Q.dlog[codes]]
            naive = naive_rows(Q, codes, n)
            checked += 1
            mismatched += not np.array_equal(conv, naive)
    cp_checked, cp_bad, cp_uncovered = 0, 0, []
    for q, n, k in CLOSED_POINT_CASES:
        if q ** (4 * (n + 1)) > CLOSED_POINT_FIELD_BUDGET:
            cp_uncovered.append((q, n, k))
            continue
        p, a = (2, 2) if q == 4 else (q, 1)
        F, op = make_field(p, a), LinOp.sym(k)
        cp_checked += 1
        cp_bad += closed_point_series(F, n, op, 4) != exp_series(log_coefficients(F, n, op, 4).c)
    worst = max((c for _, _, c in uncovered), default=0)
    ok = mismatched == 0 and not uncovered and cp_bad == 0 and not cp_uncovered
    by_n = {n: sum(1 for _, m, _ in uncovered if m == n) for n in (1, 2, 3)}
    record(9, "oracle equivalence", ok,
           f"convolution = naive on {checked} (field, n) cases, {mismatched} mismatches; "
           f"{len(uncovered)} cases not enumerated (n=2: {by_n[2]}, n=3: {by_n[3]}; "
           f"largest needs {worst:.1e} terms, budget {ORACLE_BUDGET:.1e}); closed-point oracle "
           f"{cp_checked} cases, {cp_bad} mismatches, not run: {cp_uncovered}")
    assert mismatched == 0 and cp_bad == 0  # the covered part must hold regardless
    assert ok


# -- 10 ---------------------------------------------------------------------------------

SMALL_FIELDS = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2),
                (11, 1), (13, 1)]


def _galois_instance(rng) -> bool:
    p, d = SMALL_FIELDS[rng.integers(len(SMALL_FIELDS))]
    Q = make_field(p, d)
    n = int(rng.integers(1, 3))
    t = Q.from_code(int(rng.integers(1, Q.size)))
    s = fiber_sum_naive(Q, t, n)
    ok = fiber_sum_naive(Q, t**p, n) == s
    c = int(rng.integers(1, p)) if p > 2 else 1
    return ok and s.conjugate(c) == fiber_sum_naive(Q, t * Q(c) ** (n + 1), n)


def _embedding_instance(rng) -> bool:
    p, a, m = [(2, 1, 2), (2, 2, 2), (3, 1, 2), (2, 1, 3), (5, 1, 2), (2, 2, 3), (3, 1, 3)][rng.integers(7)]
    j = int(rng.integers(1, 3))
    tab = batch_power_sums(make_field(p, a), m, j, 1)
    base = make_field(p, a * m)
    big = build_dlog(make_field(p, a * m * j))
    e = embed(base, big)
    conj = embedding_with_root(base, big, e.image ** (p ** int(rng.integers(1, a * m * j + 1))))
    rows = -fiber_rows(big, conj.map_codes(tab.codes), 1)
    return bool((rows == tab.sums[:, j - 1]).all())


def _newton_instance(rng) -> bool:
    p, d = SMALL_FIELDS[rng.integers(len(SMALL_FIELDS))]
    n = int(rng.integers(1, 3))
    if (p**d) ** (n + 1) > 2**12:
        p, d = 2, 1
    F = make_field(p, d)
    tab = batch_power_sums(F, 1, n + 1, n)
    ps = [CycVec.from_rows(p, tab.sums[:, j]) for j in range(n + 1)]
    try:
        e = elementary_from_power_sums(ps, n + 1, CycVec.constant(p, 1, len(tab)))
    except ArithmeticError:
        return False
    top = F.size ** (n * (n + 1) // 2)
    return all(row == (top,) + (0,) * (len(row) - 1) for row in e[n + 1].rows())


def _hull_instance(rng) -> bool:
    pts = [(0, 0)] + [(int(rng.integers(1, 12)), int(rng.integers(-3, 15))) for _ in range(rng.integers(1, 10))]
    hull = lower_hull(pts)
    if hull[0] != (0, 0):
        hull = lower_hull([(0, 0)] + [(x, max(y, 0)) for x, y in pts[1:]])
        pts = [(0, 0)] + [(x, max(y, 0)) for x, y in pts[1:]]
    P = Polygon(tuple(hull))
    s = P.slopes()
    if any(b <= a for a, b in zip(s, s[1:])):
        return False
    if any(Fraction(y) < P(x) for x, y in pts if x <= P.length):
        return False
    f = [1] + [int(rng.integers(-50, 50)) * int(rng.choice([1, 2, 4, 8, 16])) for _ in range(rng.integers(1, 6))]
    if f[-1] == 0:
        f[-1] = 1
    NP = newton_polygon(f, 2)
    return NP.is_lower_convex() and set(NP.vertices) <= {(Fraction(i), Fraction(_v2(c))) for i, c in enumerate(f) if c}


def _v2(c: int) -> int:
    v = 0
    while c % 2 == 0:
        c //= 2
        v += 1
    return v


def test_criterion_10_property_suite():
    rng = np.random.default_rng(SEED)
    counts = {}
    for name, fn, trials in (("Galois invariance", _galois_instance, 40),
                             ("embedding independence", _embedding_instance, 20),
                             ("Newton-identity exactness", _newton_instance, 20),
                             ("hull validity", _hull_instance, 200)):
        passed = sum(bool(fn(rng)) for _ in range(trials))
        counts[name] = (passed, trials)
    ok = all(p == t for p, t in counts.values())
    record(10, "property suite", ok,
           ", ".join(f"{k} {p}/{t}" for k, (p, t) in counts.items()) + f" (seed {SEED})")
    assert ok
