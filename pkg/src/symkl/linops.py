"""Linear-algebra operations (Sym^k, wedge^l, tensor powers and products of these):
weight generating polynomials, traces from power sums, obstruction counts d(L, n, p).
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import polyfp

KINDS = ("sym", "ext", "tensor")


@dataclass(frozen=True)
class LinOp:
    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("empty operation")
        for kind, deg in self.factors:
            if kind not in KINDS:
                raise ValueError(f"unknown factor kind {kind!r}")
            if deg < 1:
                raise ValueError(f"factor degree must be >= 1, got {deg}")

    @classmethod
    def parse(cls, text: str) -> LinOp:
        """Parse "sym:3", "ext:2*sym:1", "tensor:2"."""
        factors = []
        for part in text.strip().lower().split("*"):
            m = re.fullmatch(r"\s*(sym|ext|tensor)\s*:\s*(\d+)\s*", part)
            if not m:
                raise ValueError(f"cannot parse factor {part!r} in {text!r}")
            factors.append((m.group(1), int(m.group(2))))
        return cls(tuple(factors))

    @classmethod
    def sym(cls, k: int) -> LinOp:
        return cls((("sym", k),))

    @property
    def total_degree(self) -> int:
        return sum(d for _, d in self.factors)

    @property
    def name(self) -> str:
        return "*".join(f"{k}:{d}" for k, d in self.factors)

    def __str__(self) -> str:
        return self.name

    def is_sym(self) -> int | None:
        """k when the operation is a single Sym^k, else None."""
        if len(self.factors) == 1 and self.factors[0][0] == "sym":
            return self.factors[0][1]
        return None

    def check_dimension(self, n: int) -> None:
        for kind, deg in self.factors:
            if kind == "ext" and deg > n + 1:
                raise ValueError(f"ext:{deg} exceeds dimension {n + 1}")

    def index_count(self, n: int) -> int:
        """#J for the bound dimension n + 1."""
        self.check_dimension(n)
        total = 1
        for kind, deg in self.factors:
            if kind == "sym":
                total *= math.comb(n + deg, deg)
            elif kind == "ext":
                total *= math.comb(n + 1, deg)
            else:
                total *= (n + 1) ** deg
        return total


# -- weight generating polynomial --------------------------------------------------

def _poly_mul(f: Sequence[int], g: Sequence[int]) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def _subset_weights(n: int, size: int, repeat: bool) -> list[int]:
    """Counts by weight sum of size-``size`` multisets (or sets) from {0..n}."""
    # table[s][w]: number of choices of s elements with weight w
    top = n * size
    table = [[0] * (top + 1) for _ in range(size + 1)]
    table[0][0] = 1
    for j in range(n + 1):
        new = [row[:] for row in table] if not repeat else table
        if repeat:
            for s in range(1, size + 1):
                for w in range(j, top + 1):
                    table[s][w] += table[s - 1][w - j]
        else:
            for s in range(1, size + 1):
                for w in range(j, top + 1):
                    new[s][w] += table[s - 1][w - j]
            table = new
    return table[size]


def factor_r_poly(kind: str, deg: int, n: int) -> list[int]:
    if kind == "sym":
        return _subset_weights(n, deg, repeat=True)
    if kind == "ext":
        if deg > n + 1:
            raise ValueError(f"ext:{deg} exceeds dimension {n + 1}")
        return _subset_weights(n, deg, repeat=False)
    out = [1]
    for _ in range(deg):
        out = _poly_mul(out, [1] * (n + 1))
    return out


@dataclass(frozen=True)
class WeightGen:
    coeffs: tuple[int, ...]
    n: int

    def at_one(self) -> int:
        return sum(self.coeffs)


def r_poly(op: LinOp, n: int) -> WeightGen:
    """R_L(T) = sum over J of T^{j_1 + ... + j_m}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    op.check_dimension(n)
    out = [1]
    for kind, deg in op.factors:
        out = _poly_mul(out, factor_r_poly(kind, deg, n))
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return WeightGen(tuple(out), n)


# -- batched Z[zeta_p] values ------------------------------------------------------

WORD_LIMIT = 2**62


def _max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return max(int(a.max()), -int(a.min()))


def _narrow(a: np.ndarray) -> np.ndarray:
    """int64 when every entry fits with headroom, else Python ints."""
    if a.dtype == np.int64:
        return a
    if _max_abs(a) < WORD_LIMIT:
        return a.astype(np.int64)
    return a.astype(object)


def _widen_if(a: np.ndarray, bound: int) -> np.ndarray:
    return a.astype(object) if bound >= WORD_LIMIT and a.dtype != object else a


class CycVec:
    """A batch of elements of Z[zeta_p], shape (N, max(p-1, 1)).

    Entries are int64 while a bound check proves the next operation cannot
    overflow; otherwise arithmetic switches to Python integers.
    """

    __slots__ = ("p", "data", "_bound")

    def __init__(self, p: int, data: np.ndarray):
        self.p = p
        self.data = _narrow(np.asarray(data))
        self._bound = _max_abs(self.data)

    @classmethod
    def from_rows(cls, p: int, rows: np.ndarray) -> CycVec:
        return cls(p, np.asarray(rows))

    @classmethod
    def constant(cls, p: int, value: int, size: int) -> CycVec:
        dtype = np.int64 if abs(value) < WORD_LIMIT else object
        data = np.zeros((size, max(p - 1, 1)), dtype=dtype)
        data[:, 0] = value
        return cls(p, data)

    def __len__(self) -> int:
        return self.data.shape[0]

    def _lift(self, other) -> CycVec:
        if isinstance(other, CycVec):
            return other
        if isinstance(other, (int, np.integer)):
            return CycVec.constant(self.p, int(other), len(self))
        return NotImplemented

    def _pair(self, other: CycVec, bound: int) -> tuple[np.ndarray, np.ndarray]:
        return _widen_if(self.data, bound), _widen_if(other.data, bound)

    def __add__(self, other):
        other = self._lift(other)
        x, y = self._pair(other, self._bound + other._bound)
        return CycVec(self.p, x + y)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        x, y = self._pair(other, self._bound + other._bound)
        return CycVec(self.p, x - y)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return CycVec(self.p, -self.data)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            x = _widen_if(self.data, self._bound * abs(int(other)))
            return CycVec(self.p, x * int(other))
        other = self._lift(other)
        p = self.p
        w = max(p - 1, 1)
        x, y = self._pair(other, self._bound * other._bound * w * 2)
        if p == 2:
            return CycVec(2, x * y)
        acc = np.zeros((len(self), p), dtype=x.dtype)
        for i in range(w):
            a = x[:, i]
            for j in range(w):
                acc[:, (i + j) % p] += a * y[:, j]
        return CycVec(p, acc[:, :w] - acc[:, w:])

    __rmul__ = __mul__

    def exact_div(self, n: int) -> CycVec:
        if self.data.dtype == object or abs(n) >= WORD_LIMIT:
            # numpy has no divmod loop for object arrays
            data = self.data.astype(object)
            q = data // n
            r = data - q * n
        else:
            q, r = np.divmod(self.data, n)
        if r.any():
            raise ArithmeticError(f"batch not divisible by {n}")
        return CycVec(self.p, q)

    def conjugate(self, c: int) -> CycVec:
        """Apply zeta -> zeta^c entrywise."""
        p = self.p
        if p == 2:
            return CycVec(2, self.data.copy())
        x = _widen_if(self.data, self._bound * 2)
        red = np.zeros((len(self), p), dtype=x.dtype)
        for i in range(p - 1):
            red[:, (i * c) % p] += x[:, i]
        return CycVec(p, red[:, : p - 1] - red[:, p - 1 :])

    def total(self) -> list[int]:
        return [int(x) for x in self.data.astype(object).sum(axis=0)]

    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.data]


# -- traces from power sums --------------------------------------------------------

def complete_from_power_sums(p_sums: Sequence, k: int, one) -> list:
    """h_0..h_k by k h_k = sum_{j=1}^k h_{k-j} p_j."""
    h = [one]
    for s in range(1, k + 1):
        acc = h[s - 1] * p_sums[0]
        for j in range(2, s + 1):
            acc = acc + h[s - j] * p_sums[j - 1]
        h.append(acc.exact_div(s))
    return h


def elementary_from_power_sums(p_sums: Sequence, k: int, one) -> list:
    """e_0..e_k by k e_k = sum (-1)^{j-1} e_{k-j} p_j."""
    e = [one]
    for s in range(1, k + 1):
        acc = e[s - 1] * p_sums[0]
        for j in range(2, s + 1):
            term = e[s - j] * p_sums[j - 1]
            acc = acc + term if j % 2 else acc - term
        e.append(acc.exact_div(s))
    return e


def power_sums_from_elementary(e: Sequence, j_max: int, zero) -> list:
    """p_1..p_{j_max} of the roots of sum (-1)^s e_s X^{deg - s} (e_s = 0 past the end)."""
    deg = len(e) - 1
    ps: list = []
    for s in range(1, j_max + 1):
        acc = zero
        for j in range(1, min(s - 1, deg) + 1):
            term = e[j] * ps[s - j - 1]
            acc = acc + term if j % 2 else acc - term
        if s <= deg:
            term = e[s] * s
            acc = acc + term if s % 2 else acc - term
        ps.append(acc)
    return ps


def trace_from_power_sums(op: LinOp, p_sums: Sequence, one=None):
    """Tr L(A) from p_j = Tr(A^j), j = 1..m_L.

    Works for CycInt, CycVec or anything with +, -, * and exact_div(int).
    ``one`` is the multiplicative identity (defaults to p_sums[0]*0 + 1).
    """
    need = max(deg if kind != "tensor" else 1 for kind, deg in op.factors)
    if len(p_sums) < need:
        raise ValueError(f"need {need} power sums, got {len(p_sums)}")
    if one is None:
        one = p_sums[0] * 0 + 1
    total = one
    for kind, deg in op.factors:
        if kind == "sym":
            val = complete_from_power_sums(p_sums, deg, one)[deg]
        elif kind == "ext":
            val = elementary_from_power_sums(p_sums, deg, one)[deg]
        else:
            val = one
            for _ in range(deg):
                val = val * p_sums[0]
        total = total * val
    return total


def max_power_needed(op: LinOp) -> int:
    return max(deg if kind != "tensor" else 1 for kind, deg in op.factors)


# -- obstruction counts -----------------------------------------------------------

def _multiplicative_order(p: int, u: int) -> int:
    if u == 1:
        return 1
    e, x = 1, p % u
    while x != 1:
        x = x * p % u
        e += 1
    return e


def cyclotomic_factors_mod_p(m: int, p: int) -> list[list[int]]:
    """Distinct monic irreducible factors of Phi_m mod p, in lexicographic order.

    When p | m the factors are those of Phi_u with u the prime-to-p part of m.
    """
    phi = [c % p for c in polyfp.cyclotomic_z(m)]
    u = m
    while u % p == 0:
        u //= p
    d = _multiplicative_order(p, u)
    out = []
    for g in polyfp.irreducibles_lex(p, d):
        if not polyfp.mod(phi, g, p):
            out.append(g)
            if len(out) * d == polyfp.cyclotomic_z(u).__len__() - 1:
                break
    return out


class _ResidueRing:
    """F_p[x]/(g) with vectors as tuples; just enough for root-of-unity sums."""

    def __init__(self, p: int, g: Sequence[int]):
        self.p = p
        self.g = list(g)
        self.d = len(g) - 1

    def power_of_x(self, e: int) -> tuple[int, ...]:
        v = polyfp.powmod([0, 1], e, self.g, self.p) if self.d > 0 else []
        v = list(v) + [0] * (self.d - len(v))
        return tuple(v)


@dataclass
class Obstruction:
    count: int
    p: int
    n: int
    op: str
    factor: list[int]
    witnesses: list[tuple[int, ...]] = field(default_factory=list)
    all_factors: list[list[int]] = field(default_factory=list)
    counts_by_factor: list[int] = field(default_factory=list)

    @property
    def invariant(self) -> bool:
        return len(set(self.counts_by_factor)) <= 1

    def to_json(self) -> dict:
        return {"d": self.count, "p": self.p, "n": self.n, "op": self.op,
                "factor": self.factor, "witnesses": [list(w) for w in self.witnesses],
                "counts_by_factor": self.counts_by_factor}


def compositions(k: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions (i_0, ..., i_{parts-1}) of k, in lexicographic order."""
    if parts == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, parts - 1):
            yield (first,) + rest


def _factor_distribution(kind: str, deg: int, n: int, powers: list[tuple], p: int) -> Counter:
    """Multiset of sums sum_i zeta^{j_i} over the factor's index set."""
    dim = len(powers[0])
    zero = (0,) * dim

    def add(u, v):
        return tuple((a + b) % p for a, b in zip(u, v))

    def scale(u, c):
        return tuple(a * c % p for a in u)

    if kind == "tensor":
        dist = Counter({zero: 1})
        for _ in range(deg):
            new: Counter = Counter()
            for vec, cnt in dist.items():
                for j in range(n + 1):
                    new[add(vec, powers[j])] += cnt
            dist = new
        return dist
    # states (size, vector) swept over basis index j
    states: Counter = Counter({(0, zero): 1})
    max_mult = deg if kind == "sym" else 1
    for j in range(n + 1):
        new = Counter()
        for (size, vec), cnt in states.items():
            for mult in range(0, min(max_mult, deg - size) + 1):
                new[(size + mult, add(vec, scale(powers[j], mult)))] += cnt
        states = new
    dist = Counter()
    for (size, vec), cnt in states.items():
        if size == deg:
            dist[vec] += cnt
    return dist


def _count_with_factor(op: LinOp, n: int, p: int, g: list[int]) -> int:
    ring = _ResidueRing(p, g)
    powers = [ring.power_of_x(j) for j in range(n + 1)]
    dim = len(powers[0])
    total: Counter = Counter({(0,) * dim: 1})
    for kind, deg in op.factors:
        dist = _factor_distribution(kind, deg, n, powers, p)
        new: Counter = Counter()
        for u, cu in total.items():
            for v, cv in dist.items():
                new[tuple((a + b) % p for a, b in zip(u, v))] += cu * cv
        total = new
    return total.get((0,) * dim, 0)


def sym_witnesses(n: int, k: int, p: int, g: list[int], limit: int = 10**6) -> list[tuple[int, ...]]:
    """Compositions i of k with sum_j i_j zeta^j = 0 (enumerated when affordable)."""
    if math.comb(n + k, n) > limit:
        return []
    ring = _ResidueRing(p, g)
    powers = [ring.power_of_x(j) for j in range(n + 1)]
    out = []
    for comp in compositions(k, n + 1):
        vec = [0] * len(powers[0])
        for i, pw in zip(comp, powers):
            if i:
                for c in range(len(vec)):
                    vec[c] = (vec[c] + i * pw[c]) % p
        if not any(vec):
            out.append(comp)
    return out


def d_obstruction(op: LinOp, n: int, p: int, factor_index: int = 0,
                  check_all: bool = True) -> Obstruction:
    """d(L, n, p): number of J-tuples with sum zeta_{n+1}^{j_i} = 0 in characteristic p.

    zeta_{n+1} is the class of x in F_p[x]/(g), g the ``factor_index``-th
    irreducible factor of Phi_{n+1} mod p in lexicographic order.  If p | n+1
    this is a root of unity of the prime-to-p order.
    """
    if not polyfp.is_prime(p):
        raise ValueError(f"{p} is not prime")
    op.check_dimension(n)
    factors = cyclotomic_factors_mod_p(n + 1, p)
    g = factors[factor_index]
    counts = [_count_with_factor(op, n, p, f) for f in (factors if check_all else [g])]
    count = counts[factor_index if check_all else 0]
    k = op.is_sym()
    wit = sym_witnesses(n, k, p, g) if k is not None and count else []
    if k is not None and wit and len(wit) != count:
        raise AssertionError("witness enumeration disagrees with the count")
    return Obstruction(count, p, n, op.name, g, wit, factors, counts)


def d_k(n: int, k: int, p: int) -> int:
    return d_obstruction(LinOp.sym(k), n, p, check_all=False).count


def scan_prime_power(n: int, k: int, p_max: int) -> list[int]:
    """Primes p <= p_max with d_k(n, p) != 0."""
    return [p for p in range(2, p_max + 1) if polyfp.is_prime(p) and d_k(n, k, p) != 0]
