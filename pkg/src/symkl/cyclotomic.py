"""Exact arithmetic in Z[zeta_p] on the power basis 1, zeta, ..., zeta^{p-2}."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

DEFAULT_PRECISION = 128


def _reduce(p: int, redundant: Sequence[int]) -> tuple[int, ...]:
    """Fold a vector indexed by exponents mod p into the power basis."""
    b = [0] * p
    for i, c in enumerate(redundant):
        b[i % p] += int(c)
    top = b[p - 1]
    return tuple(c - top for c in b[: p - 1])


@dataclass(frozen=True)
class CycInt:
    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != max(self.p - 1, 1):
            raise ValueError(f"expected {max(self.p - 1, 1)} coordinates, got {len(self.coeffs)}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_int(cls, p: int, n: int) -> CycInt:
        return cls(p, (int(n),) + (0,) * (max(p - 1, 1) - 1))

    @classmethod
    def from_redundant(cls, p: int, vec: Sequence[int]) -> CycInt:
        """Element sum_i vec[i] * zeta^i, exponents taken mod p."""
        if p == 2:
            return cls(2, (sum(int(c) * (-1) ** i for i, c in enumerate(vec)),))
        return cls(p, _reduce(p, vec))

    @classmethod
    def zero(cls, p: int) -> CycInt:
        return cls.from_int(p, 0)

    @classmethod
    def one(cls, p: int) -> CycInt:
        return cls.from_int(p, 1)

    # -- ring structure -----------------------------------------------------

    def _other(self, other) -> CycInt:
        if isinstance(other, CycInt):
            if other.p != self.p:
                raise ValueError(f"mixed primes {self.p} and {other.p}")
            return other
        if isinstance(other, (int, np.integer)):
            return CycInt.from_int(self.p, int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return CycInt(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.p, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return CycInt(self.p, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return CycInt(self.p, tuple(a * int(other) for a in self.coeffs))
        other = self._other(other)
        if other is NotImplemented:
            return other
        p = self.p
        if p == 2:
            return CycInt(2, (self.coeffs[0] * other.coeffs[0],))
        out = [0] * p
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[(i + j) % p] += a * b
        return CycInt(p, _reduce(p, out))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> CycInt:
        if e < 0:
            raise ValueError("negative powers are not in Z[zeta_p]")
        result = CycInt.one(self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = CycInt.from_int(self.p, int(other))
        if not isinstance(other, CycInt):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def exact_div(self, n: int) -> CycInt:
        """Divide by a rational integer; raises if the quotient leaves Z[zeta_p]."""
        q = []
        for a in self.coeffs:
            c, r = divmod(a, n)
            if r:
                raise ArithmeticError(f"{self} is not divisible by {n} in Z[zeta_{self.p}]")
            q.append(c)
        return CycInt(self.p, tuple(q))

    def conjugate(self, c: int) -> CycInt:
        """Image under the Galois automorphism zeta -> zeta^c."""
        if c % self.p == 0:
            raise ValueError("c must be prime to p")
        vec = [0] * self.p
        for i, a in enumerate(self.coeffs):
            vec[(i * c) % self.p] += a
        return CycInt.from_redundant(self.p, vec)

    def __repr__(self) -> str:
        return f"CycInt(p={self.p}, {list(self.coeffs)})"

    def __str__(self) -> str:
        terms = []
        for i, a in enumerate(self.coeffs):
            if a:
                terms.append(f"{a}" if i == 0 else f"{a}*z^{i}")
        return " + ".join(terms) or "0"

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {"p": self.p, "coeffs": [str(a) for a in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict | str) -> CycInt:
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["p"]), tuple(int(a) for a in obj["coeffs"]))


def zeta_power(p: int, e: int) -> CycInt:
    e %= p
    vec = [0] * p
    vec[e] = 1
    return CycInt.from_redundant(p, vec)


def is_rational_integer(a: CycInt) -> int | None:
    if any(a.coeffs[1:]):
        return None
    return a.coeffs[0]


def _divide_by_uniformizer(a: CycInt) -> CycInt | None:
    """a / (1 - zeta) if it lies in Z[zeta_p], else None."""
    p = a.p
    if p == 2:
        c = a.coeffs[0]
        return CycInt(2, (c // 2,)) if c % 2 == 0 else None
    total = sum(a.coeffs)  # a evaluated at zeta -> 1
    if total % p:
        return None
    s = total // p
    # A(x) - s*Phi_p(x) = (x - 1) C(x), and a/(1 - zeta) = -C(zeta)
    num = [c - s for c in a.coeffs] + [-s]
    quot = [0] * (len(num) - 1)
    carry = 0
    for i in range(len(num) - 1, 0, -1):
        carry = num[i] + carry
        quot[i - 1] = carry
    assert num[0] + carry == 0
    return CycInt(p, tuple(-c for c in quot))


def lambda_valuation(a: CycInt) -> Fraction:
    """(1 - zeta_p)-adic order of ``a``, normalized so that ord(p) = 1."""
    if a.is_zero():
        raise ValueError("valuation of zero is infinite")
    v = 0
    while True:
        b = _divide_by_uniformizer(a)
        if b is None:
            return Fraction(v, max(a.p - 1, 1))
        a = b
        v += 1


@dataclass(frozen=True)
class Embeddings:
    values: list
    error_bound: float

    def moduli(self) -> list[float]:
        return [float(abs(z)) for z in self.values]


@functools.lru_cache(maxsize=64)
def _roots_of_unity(p: int, precision: int) -> tuple:
    """exp(2 pi i e / p) for e = 0..p-1, each computed directly."""
    with mpmath.workprec(precision):
        return tuple(mpmath.expjpi(mpmath.mpf(2 * e) / p) for e in range(p))


def complex_embeddings(a: CycInt, precision: int = DEFAULT_PRECISION) -> Embeddings:
    """Values of ``a`` at the primitive p-th roots of unity exp(2 pi i c/p)."""
    p = a.p
    with mpmath.workprec(precision):
        vals = []
        if p == 2:
            vals.append(mpmath.mpc(a.coeffs[0], 0))
        else:
            roots = _roots_of_unity(p, precision)
            terms = [(i, coeff) for i, coeff in enumerate(a.coeffs) if coeff]
            for c in range(1, p):
                vals.append(mpmath.fsum(coeff * roots[(i * c) % p] for i, coeff in terms))
        weight = sum(abs(c) for c in a.coeffs) + 1
        err = float(weight * len(a.coeffs) * mpmath.mpf(2) ** (-precision + 4))
    return Embeddings(vals, err)
