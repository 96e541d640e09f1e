"""Finite fields F_{p^d} as F_p[x]/(f), with log tables and subfield embeddings.

Elements are coefficient vectors over F_p, constant term first.  For the
vectorized paths an element is also identified with its integer *code*
``sum(c_i * p**i)``.
"""

from __future__ import annotations

import functools
import itertools
import logging
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import polyfp

log = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 2**26
RECORD_VERSION = 1


class FieldError(ValueError):
    pass


def size_cap() -> int:
    return int(os.environ.get("SYMKL_FIELD_CAP", DEFAULT_SIZE_CAP))


class Field:
    """The field F_p[x]/(defining_poly) of size p**d.

    Treat instances as immutable: the only mutation is the one-time
    construction of the discrete-log tables by :func:`build_dlog`.
    """

    def __init__(self, p: int, d: int, defining_poly: Sequence[int],
                 generator: Sequence[int] | None = None, seed: int | None = None):
        self.p = p
        self.d = d
        self.defining_poly = tuple(defining_poly)
        self.generator = None if generator is None else tuple(generator)
        self.seed = seed
        self.size = p**d
        self.order = self.size - 1
        self._weights = np.array([p**i for i in range(d)], dtype=np.int64)
        self._antilog: np.ndarray | None = None
        self._dlog: np.ndarray | None = None
        self._trace_by_log: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"Field(p={self.p}, d={self.d}, f={list(self.defining_poly)})"

    @property
    def key(self) -> tuple[int, int, int | None]:
        return (self.p, self.d, self.seed)

    def to_record(self) -> dict:
        return {
            "version": RECORD_VERSION,
            "p": self.p,
            "d": self.d,
            "seed": self.seed,
            "defining_poly": list(self.defining_poly),
            "generator": None if self.generator is None else list(self.generator),
        }

    # -- elements -----------------------------------------------------------

    def __call__(self, value: int | Sequence[int] | "FieldElem") -> "FieldElem":
        if isinstance(value, FieldElem):
            if value.field is not self:
                raise FieldError("element belongs to a different field")
            return value
        if isinstance(value, (int, np.integer)):
            return self.from_code(int(value))
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.d:
            coeffs = polyfp.mod(coeffs, self.defining_poly, self.p)
        coeffs += [0] * (self.d - len(coeffs))
        return FieldElem(self, tuple(coeffs))

    def from_code(self, code: int) -> "FieldElem":
        if not 0 <= code < self.size:
            raise FieldError(f"code {code} outside [0, {self.size})")
        coeffs = []
        for _ in range(self.d):
            code, c = divmod(code, self.p)
            coeffs.append(c)
        return FieldElem(self, tuple(coeffs))

    @property
    def zero(self) -> "FieldElem":
        return self([0])

    @property
    def one(self) -> "FieldElem":
        return self([1])

    @property
    def gen(self) -> "FieldElem":
        """The class of the variable x."""
        return self([0, 1])

    def elements(self) -> Iterable["FieldElem"]:
        for code in range(self.size):
            yield self.from_code(code)

    def units(self) -> Iterable["FieldElem"]:
        for code in range(1, self.size):
            yield self.from_code(code)

    def primitive(self) -> "FieldElem":
        if self.generator is None:
            raise FieldError("field has no generator")
        return self(self.generator)

    # -- linear algebra over F_p -------------------------------------------

    def mul_matrix(self, c: "FieldElem") -> np.ndarray:
        """d x d matrix M over F_p with digits(v * c) = digits(v) @ M."""
        rows = []
        for k in range(self.d):
            rows.append((self.gen**k * c).coeffs)
        return np.array(rows, dtype=np.int64).reshape(self.d, self.d)

    @functools.cached_property
    def trace_vector(self) -> np.ndarray:
        """Absolute traces of the power basis 1, x, ..., x^{d-1}."""
        return np.array([int(np.trace(self.mul_matrix(self.gen**k))) % self.p
                         for k in range(self.d)], dtype=np.int64)

    def codes_to_digits(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[..., None] // self._weights) % self.p

    def digits_to_codes(self, digits: np.ndarray) -> np.ndarray:
        return np.asarray(digits, dtype=np.int64) @ self._weights

    def trace_codes(self, codes: np.ndarray) -> np.ndarray:
        return (self.codes_to_digits(codes) @ self.trace_vector) % self.p

    # -- discrete logs --------------------------------------------------------

    @property
    def has_dlog(self) -> bool:
        return self._dlog is not None

    def _need_tables(self) -> None:
        if self._dlog is None:
            raise FieldError(f"{self!r}: discrete-log table not built (call build_dlog)")

    @property
    def antilog(self) -> np.ndarray:
        """antilog[i] is the code of g**i, for 0 <= i < order."""
        self._need_tables()
        return self._antilog

    @property
    def dlog(self) -> np.ndarray:
        """dlog[code] = i with g**i = element; dlog[0] = -1."""
        self._need_tables()
        return self._dlog

    @property
    def trace_by_log(self) -> np.ndarray:
        """Absolute trace of g**i, indexed by i."""
        self._need_tables()
        return self._trace_by_log

    def log_of(self, x: "FieldElem") -> int:
        if x.is_zero():
            raise FieldError("log of zero")
        return int(self.dlog[x.code])


@dataclass(frozen=True)
class FieldElem:
    field: Field
    coeffs: tuple[int, ...]

    def __repr__(self) -> str:
        return f"FieldElem({list(self.coeffs)} mod {list(self.field.defining_poly)})"

    @property
    def code(self) -> int:
        return sum(c * self.field.p**i for i, c in enumerate(self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field is not self.field:
                raise FieldError("mixed-field arithmetic")
            return other
        if isinstance(other, (int, np.integer)):
            return self.field([int(other)])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        p = self.field.p
        return FieldElem(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FieldElem(self.field, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        f = self.field
        prod = polyfp.mod(polyfp.mul(self.coeffs, other.coeffs, f.p), f.defining_poly, f.p)
        return f(prod)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        f = self.field
        if e < 0:
            return self.inverse() ** (-e)
        if self.is_zero():
            return f.one if e == 0 else f.zero
        return f(polyfp.powmod(list(self.coeffs), e, f.defining_poly, f.p))

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.order - 1)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def frobenius(self, k: int = 1) -> "FieldElem":
        return self ** (self.field.p**k)

    def order(self) -> int:
        if self.is_zero():
            raise FieldError("zero has no multiplicative order")
        n = self.field.order
        for r in polyfp.prime_factors(n):
            while n % r == 0 and (self ** (n // r)).coeffs == self.field.one.coeffs:
                n //= r
        return n


def _check_params(p: int, d: int, cap: int | None) -> None:
    if not polyfp.is_prime(p):
        raise FieldError(f"{p} is not prime")
    if d < 1:
        raise FieldError(f"extension degree must be >= 1, got {d}")
    cap = size_cap() if cap is None else cap
    if p**d > cap:
        raise FieldError(f"field size {p}^{d} exceeds cap {cap}")


@functools.lru_cache(maxsize=None)
def _construct(p: int, d: int, seed: int | None) -> Field:
    skip = seed or 0
    poly = None
    for i, f in enumerate(polyfp.irreducibles_lex(p, d)):
        if i == skip:
            poly = f
            break
    assert poly is not None
    field = Field(p, d, poly, seed=seed)
    n = field.order
    primes = polyfp.prime_factors(n)
    one = field.one.coeffs
    for coeffs in itertools.product(range(p), repeat=d):
        if not any(coeffs):
            continue
        g = field(coeffs)
        if all((g ** (n // r)).coeffs != one for r in primes):
            field.generator = g.coeffs
            break
    return field


def make_field(p: int, d: int, seed: int | None = None, cap: int | None = None) -> Field:
    """F_{p^d} with the lexicographically smallest irreducible modulus.

    ``seed`` > 0 selects the seed-th irreducible in lexicographic order
    instead (used to exercise independence of the modulus).  Results are
    memoized, so equal arguments return the same object.
    """
    _check_params(p, d, cap)
    return _construct(p, d, seed)


def build_dlog(field: Field, cap: int | None = None, block: int = 4096) -> Field:
    """Attach antilog/dlog/trace-by-log tables to ``field`` (idempotent)."""
    if field.has_dlog:
        return field
    cap = size_cap() if cap is None else cap
    if field.size > cap:
        raise FieldError(f"field size {field.size} exceeds dlog cap {cap}")
    p, d, n = field.p, field.d, field.order
    g = field.primitive()
    mg = field.mul_matrix(g).astype(np.float64)
    block = max(1, min(block, n))
    first = np.zeros((block, d), dtype=np.float64)
    v = np.zeros(d)
    v[0] = 1.0
    for i in range(block):
        first[i] = v
        v = np.mod(v @ mg, p)
    step = field.mul_matrix(g**block).astype(np.float64)
    antilog = np.empty(n, dtype=np.int64)
    traces = np.empty(n, dtype=np.int16 if p < 2**15 else np.int64)
    weights = field._weights.astype(np.float64)
    tvec = field.trace_vector.astype(np.float64)
    cur = first
    for start in range(0, n, block):
        stop = min(start + block, n)
        chunk = cur[: stop - start]
        antilog[start:stop] = (chunk @ weights).astype(np.int64)
        traces[start:stop] = np.mod(chunk @ tvec, p).astype(traces.dtype)
        cur = np.mod(cur @ step, p)
    dlog = np.full(field.size, -1, dtype=np.int64)
    dlog[antilog] = np.arange(n, dtype=np.int64)
    if (dlog[1:] < 0).any() or dlog[0] != -1:
        raise FieldError("generator powers are not a bijection onto the units")
    field._antilog = antilog
    field._dlog = dlog
    field._trace_by_log = traces.astype(np.int64)
    log.debug("built dlog tables for %r", field)
    return field


def trace_abs(x: FieldElem) -> int:
    """Tr_{F_{p^d}/F_p}(x) as sum of the Frobenius conjugates x^(p^i)."""
    f = x.field
    total = f.zero
    y = x
    for _ in range(f.d):
        total = total + y
        y = y ** f.p
    assert all(c == 0 for c in total.coeffs[1:])
    return total.coeffs[0]


@dataclass(frozen=True)
class Embedding:
    source: Field
    target: Field
    image: FieldElem
    matrix: np.ndarray  # row k = digits of image**k in target

    def __call__(self, x: FieldElem) -> FieldElem:
        if x.field is not self.source:
            raise FieldError("element not in the embedding's source field")
        digits = (np.array(x.coeffs, dtype=np.int64) @ self.matrix) % self.target.p
        return self.target([int(c) for c in digits])

    def map_codes(self, codes: np.ndarray) -> np.ndarray:
        digits = self.source.codes_to_digits(codes)
        return self.target.digits_to_codes((digits @ self.matrix) % self.target.p)


_EMBED_CACHE: dict[tuple, Embedding] = {}


def _lex_min_row(digits: np.ndarray) -> int:
    order = np.lexsort(digits.T[::-1])
    return int(order[0])


def roots_in(f: Sequence[int], target: Field, subfield_degree: int | None = None) -> np.ndarray:
    """Codes of the roots of ``f`` in ``target`` lying in its degree-``subfield_degree`` subfield."""
    build_dlog(target)
    p, n = target.p, target.order
    e = subfield_degree or target.d
    if target.d % e:
        raise FieldError("subfield degree must divide the extension degree")
    step = n // (p**e - 1)
    logs = np.arange(0, n, step, dtype=np.int64)
    acc = np.zeros((len(logs), target.d), dtype=np.int64)
    for k, c in enumerate(f):
        if c % p == 0:
            continue
        powers = target.antilog[(k * logs) % n]
        acc += (c % p) * target.codes_to_digits(powers)
    acc %= p
    roots = list(target.antilog[logs[~acc.any(axis=1)]])
    if f and f[0] % p == 0:
        roots.append(0)
    return np.array(sorted(roots), dtype=np.int64)


def embed(sub: Field, sup: Field) -> Embedding:
    """Embed ``sub`` into ``sup`` via the lexicographically smallest root."""
    if sub.p != sup.p:
        raise FieldError("fields of different characteristic")
    if sup.d % sub.d:
        raise FieldError(f"cannot embed F_{sub.p}^{sub.d} into F_{sup.p}^{sup.d}: {sub.d} does not divide {sup.d}")
    key = (sub.key, sup.key)
    if key in _EMBED_CACHE:
        return _EMBED_CACHE[key]
    roots = roots_in(sub.defining_poly, sup, sub.d)
    if len(roots) == 0:
        raise FieldError("internal error: no root of the source modulus in the target")
    digits = sup.codes_to_digits(roots)
    image = sup([int(c) for c in digits[_lex_min_row(digits)]])
    rows = [(image**k).coeffs for k in range(sub.d)]
    emb = Embedding(sub, sup, image, np.array(rows, dtype=np.int64).reshape(sub.d, sup.d))
    _EMBED_CACHE[key] = emb
    return emb


def embedding_with_root(sub: Field, sup: Field, root: FieldElem) -> Embedding:
    """Embedding sending x to a caller-chosen root of ``sub.defining_poly``."""
    value = sup.zero
    for k, c in enumerate(sub.defining_poly):
        value = value + root**k * c
    if not value.is_zero():
        raise FieldError("image is not a root of the source modulus")
    rows = [(root**k).coeffs for k in range(sub.d)]
    return Embedding(sub, sup, root, np.array(rows, dtype=np.int64).reshape(sub.d, sup.d))


def frobenius_orbit(x: FieldElem, q: int) -> list[FieldElem]:
    """Orbit of ``x`` under y -> y^q."""
    orbit = [x]
    y = x**q
    while y != x:
        orbit.append(y)
        y = y**q
    return orbit
