"""Weight-graded linear algebra for the reduced symmetric-power connection.

The module is free over F_q[t] on the monomials e^i = e_0^{i_0} ... e_n^{i_n},
|i| = k.  The operator G sends e_j to e_{j+1} (j < n) and e_n to t e_0; its
Leibniz extension nabla is F_q[t]-linear and raises the weight
W(r, i) = (n+1) r + w(i), w(i) = sum_j j i_j, by exactly one.  All entries are
integers reduced mod p, so ranks are computed over F_p.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .linops import compositions, r_poly, LinOp
from .polygons import hodge_numbers

log = logging.getLogger(__name__)

Mono = tuple[int, ...]
Key = tuple[int, Mono]  # (t-degree r, exponent tuple)


# -- linear algebra mod p -----------------------------------------------------------

def row_echelon(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p and the pivot columns."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        others = np.nonzero(A[:, c])[0]
        for i in others:
            if i != r:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        pivots.append(c)
        r += 1
    return A, pivots


def rank_mod_p(M: np.ndarray, p: int) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(row_echelon(M, p)[1])


def solve_mod_p(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution x of A x = b over F_p (free variables zero), or None."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    if A.shape[1] == 0:
        return np.zeros(0, dtype=np.int64) if not (b % p).any() else None
    R, piv = row_echelon(np.hstack([A, b]), p)
    ncols = A.shape[1]
    if ncols in piv:
        return None
    x = np.zeros(ncols, dtype=np.int64)
    for row, c in enumerate(piv):
        x[c] = R[row, -1]
    return x


# -- the graded module ----------------------------------------------------------------

def weight(i: Mono) -> int:
    return sum(j * c for j, c in enumerate(i))


@dataclass
class GradedSymModule:
    n: int
    k: int
    p: int

    @cached_property
    def monomials(self) -> list[Mono]:
        """Exponent tuples in lexicographic order."""
        return sorted(compositions(self.k, self.n + 1))

    @property
    def rank(self) -> int:
        return math.comb(self.n + self.k, self.n)

    @property
    def top_weight(self) -> int:
        return self.n * self.k

    @property
    def window(self) -> int:
        """Weights up to nk + n + 1 determine everything (t-shift periodicity)."""
        return self.n * self.k + self.n + 1

    def W(self, key: Key) -> int:
        r, i = key
        return (self.n + 1) * r + weight(i)

    def basis(self, N: int) -> list[Key]:
        """(r, i) with (n+1) r + w(i) = N, ordered by r then exponent tuple."""
        out = []
        if N < 0:
            return out
        for i in self.monomials:
            rest = N - weight(i)
            if rest >= 0 and rest % (self.n + 1) == 0:
                out.append((rest // (self.n + 1), i))
        return sorted(out)

    def filtration_basis(self, N: int) -> list[Key]:
        out = []
        for M in range(N + 1):
            out.extend(self.basis(M))
        return out

    def nabla_of(self, key: Key) -> dict[Key, int]:
        """nabla(t^r e^i) as {(r', i'): coefficient mod p}."""
        r, i = key
        n = self.n
        out: dict[Key, int] = {}
        for j in range(n + 1):
            c = i[j] % self.p
            if not c:
                continue
            lst = list(i)
            lst[j] -= 1
            if j < n:
                lst[j + 1] += 1
                tgt = (r, tuple(lst))
            else:
                lst[0] += 1
                tgt = (r + 1, tuple(lst))
            out[tgt] = (out.get(tgt, 0) + c) % self.p
        return {kk: v for kk, v in out.items() if v}

    def nabla_block(self, N: int) -> np.ndarray:
        """Matrix of nabla from weight N to weight N+1 (columns are images)."""
        src, dst = self.basis(N), self.basis(N + 1)
        index = {key: a for a, key in enumerate(dst)}
        M = np.zeros((len(dst), len(src)), dtype=np.int64)
        for col, key in enumerate(src):
            for tgt, c in self.nabla_of(key).items():
                M[index[tgt], col] = c  # KeyError would break weight-1 homogeneity
        return M


@dataclass
class GradedMap:
    n: int
    k: int
    p: int
    blocks: dict[int, np.ndarray]

    def shape(self, N: int) -> tuple[int, int]:
        return self.blocks[N].shape


def nabla_matrix(n: int, k: int, p: int, N_max: int | None = None) -> GradedMap:
    mod = GradedSymModule(n, k, p)
    if (n + 1) % p == 0:
        log.warning("p = %d divides n + 1 = %d", p, n + 1)
    N_max = mod.window if N_max is None else N_max
    return GradedMap(n, k, p, {N: mod.nabla_block(N) for N in range(N_max + 1)})


@dataclass
class InjectivityReport:
    injective: bool
    kernel_weights: list[int]
    kernel_dims: dict[int, int]

    def to_json(self) -> dict:
        return {"injective": self.injective, "kernel_weights": self.kernel_weights,
                "kernel_dims": {str(k): v for k, v in self.kernel_dims.items()}}


def injectivity_report(n: int, k: int, p: int, N_max: int | None = None) -> InjectivityReport:
    mod = GradedSymModule(n, k, p)
    N_max = mod.window if N_max is None else N_max
    if N_max < mod.window:
        log.warning("N_max = %d is below the stabilization window %d", N_max, mod.window)
    dims = {}
    for N in range(N_max + 1):
        B = mod.nabla_block(N)
        ker = B.shape[1] - rank_mod_p(B, p)
        if ker:
            dims[N] = ker
    return InjectivityReport(not dims, sorted(dims), dims)


def coker_dimensions(n: int, k: int, p: int, N_max: int | None = None) -> list[int]:
    """dim of the weight-N cokernel of nabla, N = 0..N_max."""
    mod = GradedSymModule(n, k, p)
    N_max = mod.window if N_max is None else N_max
    out = []
    for N in range(N_max + 1):
        dim = len(mod.basis(N))
        img = rank_mod_p(mod.nabla_block(N - 1), p) if N > 0 else 0
        out.append(dim - img)
    return out


def expected_dimensions(n: int, k: int) -> list[int] | None:
    """Coefficients of R(T)/(1 + ... + T^n) when the division is exact."""
    hd = hodge_numbers(r_poly(LinOp.sym(k), n).coeffs, n)
    return list(hd.h) if hd.exact else None


# -- constant basis ---------------------------------------------------------------------

class BasisError(ArithmeticError):
    pass


def constant_basis(n: int, k: int, p: int) -> list[Mono]:
    """Greedy choice of t-free monomials spanning every weight-graded cokernel.

    Within a weight, candidates are tried in lexicographic order of their
    exponent tuples; a candidate is kept when independent of the image of
    nabla and of the candidates already kept.
    """
    mod = GradedSymModule(n, k, p)
    dims = coker_dimensions(n, k, p)
    chosen: list[Mono] = []
    for N, need in enumerate(dims):
        basis = mod.basis(N)
        index = {key: a for a, key in enumerate(basis)}
        cols = [mod.nabla_block(N - 1)] if N > 0 else []
        span = np.hstack(cols) if cols else np.zeros((len(basis), 0), dtype=np.int64)
        base_rank = rank_mod_p(span, p)
        picked = []
        for i in sorted(m for m in mod.monomials if weight(m) == N):
            v = np.zeros((len(basis), 1), dtype=np.int64)
            v[index[(0, i)]] = 1
            trial = np.hstack([span, v])
            if rank_mod_p(trial, p) > base_rank:
                span, base_rank = trial, base_rank + 1
                picked.append(i)
        if len(picked) != need:
            raise BasisError(f"weight {N}: constant monomials span {len(picked)} of the "
                             f"{need}-dimensional cokernel (n={n}, k={k}, p={p})")
        if base_rank != len(basis):
            raise BasisError(f"weight {N}: image plus constants do not fill the weight space")
        chosen.extend(picked)
    return chosen


# -- reduction modulo the image of t d/dt + nabla ------------------------------------------

@dataclass
class Reduction:
    coords: dict[Mono, list[int]]  # basis monomial -> F_q coefficient as F_p digits
    certificate: dict[Key, list[int]]
    weight: int

    def to_json(self) -> dict:
        return {"coords": {str(list(i)): v for i, v in self.coords.items()},
                "certificate": {f"t^{r}*{list(i)}": v for (r, i), v in self.certificate.items()},
                "weight": self.weight}


def partial1_of(mod: GradedSymModule, key: Key) -> dict[Key, int]:
    """(t d/dt + nabla)(t^r e^i)."""
    out = dict(mod.nabla_of(key))
    r = key[0] % mod.p
    if r:
        out[key] = (out.get(key, 0) + r) % mod.p
    return {kk: v for kk, v in out.items() if v}


def apply_partial1(mod: GradedSymModule, elem: dict[Key, Sequence[int]], a: int) -> dict[Key, list[int]]:
    out: dict[Key, list[int]] = {}
    for key, coeff in elem.items():
        for tgt, c in partial1_of(mod, key).items():
            acc = out.setdefault(tgt, [0] * a)
            for s in range(a):
                acc[s] = (acc[s] + c * coeff[s]) % mod.p
    return {kk: v for kk, v in out.items() if any(v)}


def _normalize(elem: dict, a: int, p: int) -> dict[Key, list[int]]:
    out = {}
    for key, c in elem.items():
        vec = [int(c) % p] + [0] * (a - 1) if isinstance(c, (int, np.integer)) else [int(x) % p for x in c]
        vec += [0] * (a - len(vec))
        if any(vec):
            out[key] = vec
    return out


def partial1_reduce(elem: dict, n: int, k: int, p: int, a: int = 1,
                    basis: Sequence[Mono] | None = None) -> Reduction:
    """Write elem = sum_{i in B_k} a_i e^i + (t d/dt + nabla)(zeta).

    ``elem`` maps (r, exponent tuple) to an F_q coefficient, given as an int
    (prime-field element) or a length-a digit vector over F_p.  Because the
    operator has F_p entries the system is solved digit by digit.
    """
    mod = GradedSymModule(n, k, p)
    B = list(basis) if basis is not None else constant_basis(n, k, p)
    elem = _normalize(elem, a, p)
    for (r, i) in elem:
        if sum(i) != k or len(i) != n + 1 or r < 0:
            raise ValueError(f"({r}, {i}) is not a basis element")
    N = max((mod.W(key) for key in elem), default=0)
    rows = mod.filtration_basis(N)
    index = {key: x for x, key in enumerate(rows)}
    B_cols = [i for i in B if weight(i) <= N]
    zeta_keys = mod.filtration_basis(N - 1) if N > 0 else []
    A = np.zeros((len(rows), len(B_cols) + len(zeta_keys)), dtype=np.int64)
    for col, i in enumerate(B_cols):
        A[index[(0, i)], col] = 1
    for col, key in enumerate(zeta_keys, start=len(B_cols)):
        for tgt, c in partial1_of(mod, key).items():
            A[index[tgt], col] = c
    coords = {i: [0] * a for i in B_cols}
    cert: dict[Key, list[int]] = {}
    for s in range(a):
        rhs = np.zeros(len(rows), dtype=np.int64)
        for key, vec in elem.items():
            rhs[index[key]] = vec[s]
        x = solve_mod_p(A, rhs, p)
        if x is None:
            raise BasisError(f"element of weight {N} is not reducible onto B_k")
        for col, i in enumerate(B_cols):
            coords[i][s] = int(x[col])
        for col, key in enumerate(zeta_keys, start=len(B_cols)):
            if x[col]:
                cert.setdefault(key, [0] * a)[s] = int(x[col])
    red = Reduction({i: v for i, v in coords.items() if any(v)}, cert, N)
    # certificate check: sum a_i e^i + partial1(zeta) reproduces elem
    back = apply_partial1(mod, cert, a)
    for i, v in red.coords.items():
        acc = back.setdefault((0, i), [0] * a)
        for s in range(a):
            acc[s] = (acc[s] + v[s]) % p
    back = {kk: v for kk, v in back.items() if any(v)}
    if back != elem:
        raise AssertionError("reduction certificate does not reproduce the input")
    return red
