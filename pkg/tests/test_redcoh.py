from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symkl.linops import d_k
from symkl.redcoh import (
    GradedSymModule,
    apply_partial1,
    coker_dimensions,
    constant_basis,
    expected_dimensions,
    injectivity_report,
    nabla_matrix,
    partial1_reduce,
    rank_mod_p,
    solve_mod_p,
)


def _trimmed(dims):
    dims = list(dims)
    while dims and dims[-1] == 0:
        dims.pop()
    return dims


# -- linear algebra mod p -------------------------------------------------------------

def test_rank_and_solve():
    A = np.array([[1, 2], [2, 4]])
    assert rank_mod_p(A, 7) == 1
    assert rank_mod_p(A, 2) == 1
    assert rank_mod_p(np.array([[1, 1], [1, 2]]), 3) == 2
    x = solve_mod_p(np.array([[1, 1], [1, 2]]), np.array([2, 0]), 3)
    assert ((np.array([[1, 1], [1, 2]]) @ x - [2, 0]) % 3 == 0).all()
    assert solve_mod_p(A, np.array([0, 1]), 7) is None


@given(st.integers(1, 5), st.integers(1, 5), st.sampled_from([2, 3, 5, 7]), st.integers(0, 10**6))
def test_rank_equals_transpose_rank(r, c, p, seed):
    # rank of A equals rank of its transpose
    A = np.random.default_rng(seed).integers(0, p, size=(r, c))
    assert rank_mod_p(A, p) == rank_mod_p(A.T.copy(), p) <= min(r, c)


# -- graded module -------------------------------------------------------------------------

def test_module_shape():
    mod = GradedSymModule(2, 3, 5)
    assert mod.rank == len(mod.monomials) == math.comb(5, 2)
    ws = [sum(j * c for j, c in enumerate(i)) for i in mod.monomials]
    assert min(ws) == 0 and max(ws) == 2 * 3
    assert mod.window == 2 * 3 + 2 + 1


def test_nabla_examples():
    mod = GradedSymModule(1, 3, 2)
    assert mod.nabla_of((0, (3, 0))) == {(0, (2, 1)): 1}
    assert mod.nabla_of((0, (2, 1))) == {(1, (3, 0)): 1}
    # k = 1 is the companion matrix with t in the corner
    m1 = GradedSymModule(2, 1, 7)
    assert m1.nabla_of((0, (1, 0, 0))) == {(0, (0, 1, 0)): 1}
    assert m1.nabla_of((0, (0, 1, 0))) == {(0, (0, 0, 1)): 1}
    assert m1.nabla_of((0, (0, 0, 1))) == {(1, (1, 0, 0)): 1}


@given(st.integers(1, 3), st.integers(1, 4), st.sampled_from([2, 3, 5, 7]))
def test_weight_one_homogeneity(n, k, p):
    mod = GradedSymModule(n, k, p)
    for N in range(mod.window + 1):
        for key in mod.basis(N):
            assert mod.W(key) == N
            assert all(mod.W(tgt) == N + 1 for tgt in mod.nabla_of(key))
    G = nabla_matrix(n, k, p)
    for N in range(mod.window + 1):
        assert G.shape(N) == (len(mod.basis(N + 1)), len(mod.basis(N)))


def test_nabla_warns_when_p_divides(caplog):
    nabla_matrix(1, 1, 2)
    assert any("divides" in r.message for r in caplog.records)


# -- injectivity and cokernels -----------------------------------------------------------

def test_injectivity_examples():
    for p in (2, 3, 5, 7):
        assert not injectivity_report(1, 2, p).injective
    assert injectivity_report(1, 3, 2).injective
    rep = injectivity_report(1, 3, 3)
    assert not rep.injective and 3 in rep.kernel_weights


def test_coker_examples():
    assert _trimmed(coker_dimensions(1, 3, 2)) == [1, 0, 1]
    assert sum(coker_dimensions(2, 2, 3)) == 2
    assert constant_basis(1, 3, 2) == [(3, 0), (1, 2)]


@pytest.mark.parametrize("n,p", [(1, 3), (2, 2), (2, 5), (3, 3), (4, 3)])
def test_k1_cokernel_is_weight_zero_line(n, p):
    assert _trimmed(coker_dimensions(n, 1, p)) == [1]
    assert constant_basis(n, 1, p) == [(1,) + (0,) * n]


BATTERY = [(n, k, p) for n in (1, 2, 3) for k in range(1, 6) for p in (2, 3, 5, 7)
           if math.comb(n + k, n) <= 60]


@pytest.mark.parametrize("n,k,p", BATTERY)
def test_injective_iff_obstruction_free(n, k, p):
    d = d_k(n, k, p)
    inj = injectivity_report(n, k, p).injective
    assert inj == (d == 0)
    if d == 0:
        dims = _trimmed(coker_dimensions(n, k, p))
        assert sum(dims) * (n + 1) == math.comb(n + k, n)
        exp = expected_dimensions(n, k)
        if exp is not None:
            assert dims == exp
        assert len(constant_basis(n, k, p)) == sum(dims)


def test_battery_has_both_signs():
    signs = {d_k(n, k, p) == 0 for n, k, p in BATTERY}
    assert signs == {True, False}


# -- reduction modulo the image of t d/dt + nabla ---------------------------------------

def test_reduce_basis_element_is_itself():
    red = partial1_reduce({(0, (1, 2)): 1}, 1, 3, 2)
    assert red.coords == {(1, 2): [1]} and red.certificate == {}


def test_reduce_t_e0_cubed():
    # t e_0^3 has weight 2 over F_2; it reduces onto B_3 with a certificate
    red = partial1_reduce({(1, (3, 0)): 1}, 1, 3, 2)
    assert set(red.coords) <= {(3, 0), (1, 2)}
    mod = GradedSymModule(1, 3, 2)
    back = apply_partial1(mod, red.certificate, 1)
    for i, v in red.coords.items():
        back[(0, i)] = [(back.get((0, i), [0])[0] + v[0]) % 2]
    assert {key: v for key, v in back.items() if any(v)} == {(1, (3, 0)): [1]}


CASES = [(1, 3, 2), (2, 2, 3), (1, 5, 2), (1, 3, 5), (2, 1, 5)]


@given(st.sampled_from(CASES), st.data())
def test_image_reduces_to_zero(case, data):
    n, k, p = case
    mod = GradedSymModule(n, k, p)
    keys = mod.filtration_basis(mod.top_weight + 2)
    chosen = data.draw(st.lists(st.sampled_from(keys), min_size=1, max_size=4, unique=True))
    zeta = {key: [data.draw(st.integers(1, p - 1))] for key in chosen}
    img = apply_partial1(mod, zeta, 1)
    img = {key: v for key, v in img.items() if any(v)}
    red = partial1_reduce(img, n, k, p)
    assert red.coords == {}


@given(st.sampled_from(CASES), st.data())
def test_reduction_round_trip_over_extension(case, data):
    n, k, p = case
    a = 2
    mod = GradedSymModule(n, k, p)
    keys = mod.filtration_basis(mod.top_weight + 2)
    chosen = data.draw(st.lists(st.sampled_from(keys), min_size=1, max_size=5, unique=True))
    elem = {}
    for key in chosen:
        v = data.draw(st.lists(st.integers(0, p - 1), min_size=a, max_size=a))
        if any(v):
            elem[key] = v
    if not elem:
        return
    # partial1_reduce checks its own certificate; this also pins the support to B_k
    red = partial1_reduce(elem, n, k, p, a=a)
    assert set(red.coords) <= set(constant_basis(n, k, p))


def test_reduce_rejects_malformed():
    with pytest.raises(ValueError):
        partial1_reduce({(0, (2, 0)): 1}, 1, 3, 2)
