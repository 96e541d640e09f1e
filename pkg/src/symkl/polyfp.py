"""Dense polynomials over F_p as coefficient lists, constant term first.

Only what the rest of the package needs: arithmetic, gcd, modular powers,
Rabin's irreducibility test and lexicographic enumeration of monic polynomials.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

Poly = list[int]


def trim(f: Sequence[int]) -> Poly:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def add(f: Sequence[int], g: Sequence[int], p: int) -> Poly:
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p for i in range(n)])


def sub(f: Sequence[int], g: Sequence[int], p: int) -> Poly:
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)])


def mul(f: Sequence[int], g: Sequence[int], p: int) -> Poly:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim([c % p for c in out])


def divmod_(f: Sequence[int], g: Sequence[int], p: int) -> tuple[Poly, Poly]:
    g = trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = trim([c % p for c in f])
    inv = pow(g[-1], -1, p)
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return [], r
    q = [0] * (len(r) - dg)
    while len(r) - 1 >= dg and r:
        c = r[-1] * inv % p
        shift = len(r) - 1 - dg
        q[shift] = c
        for i, b in enumerate(g):
            r[shift + i] = (r[shift + i] - c * b) % p
        r = trim(r)
    return trim(q), r


def mod(f: Sequence[int], g: Sequence[int], p: int) -> Poly:
    return divmod_(f, g, p)[1]


def gcd(f: Sequence[int], g: Sequence[int], p: int) -> Poly:
    a, b = trim([c % p for c in f]), trim([c % p for c in g])
    while b:
        a, b = b, mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def powmod(f: Sequence[int], e: int, m: Sequence[int], p: int) -> Poly:
    result: Poly = [1]
    base = mod(f, m, p)
    while e:
        if e & 1:
            result = mod(mul(result, base, p), m, p)
        base = mod(mul(base, base, p), m, p)
        e >>= 1
    return result


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial ``f`` over F_p."""
    f = trim(f)
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    if f[0] % p == 0:
        return False
    x = [0, 1]
    if powmod(x, p**d, f, p) != mod(x, f, p):
        return False
    for r in prime_factors(d):
        h = sub(powmod(x, p ** (d // r), f, p), x, p)
        if len(gcd(h, f, p)) != 1:
            return False
    return True


def monic_lex(p: int, d: int) -> Iterator[Poly]:
    """Monic degree-``d`` polynomials, lexicographic in (c_0, ..., c_{d-1})."""
    for coeffs in itertools.product(range(p), repeat=d):
        yield list(coeffs) + [1]


def irreducibles_lex(p: int, d: int) -> Iterator[Poly]:
    for f in monic_lex(p, d):
        if is_irreducible(f, p):
            yield f


def cyclotomic_z(m: int) -> list[int]:
    """Integer coefficients of the m-th cyclotomic polynomial."""
    # x^m - 1 = prod_{e | m} Phi_e
    num = [-1] + [0] * (m - 1) + [1]
    for e in range(1, m):
        if m % e == 0:
            num = _exact_div_z(num, cyclotomic_z(e))
    return num


def _exact_div_z(f: list[int], g: list[int]) -> list[int]:
    f = list(f)
    q = [0] * (len(f) - len(g) + 1)
    for shift in range(len(q) - 1, -1, -1):
        c = f[shift + len(g) - 1] // g[-1]
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] -= c * b
    assert not any(f), "inexact integer polynomial division"
    return q
