"""The trivial factor P(n, k, T) = A_0 A_infty / B of the Sym^k L-function."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from .linops import cyclotomic_factors_mod_p, sym_witnesses

log = logging.getLogger(__name__)


def mk_coefficients(n: int, k: int) -> list[int]:
    """m_k(0..floor(kn/2)) from prod_{j=n+1}^{n+k}(1-x^j) / prod_{j=2}^{k}(1-x^j)."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    N = k * n // 2
    s = [1] + [0] * N
    for j in range(n + 1, n + k + 1):
        for i in range(N, j - 1, -1):
            s[i] -= s[i - j]
    for j in range(2, k + 1):
        for i in range(j, N + 1):
            s[i] += s[i - j]
    if any(c < 0 for c in s):
        raise ArithmeticError(f"negative m_k coefficient for n={n}, k={k}: {s}")
    return s


@dataclass(frozen=True)
class CycloPoly:
    """prod (1 - sign q^i T)^mult over (i, sign, mult) triples."""

    q: int
    factors: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        for i, sign, mult in self.factors:
            if mult < 1 or sign not in (1, -1) or i < 0:
                raise ValueError(f"bad factor {(i, sign, mult)}")

    @property
    def degree(self) -> int:
        return sum(m for _, _, m in self.factors)

    def expand(self) -> list[int]:
        out = [1]
        for i, sign, mult in self.factors:
            lin = [1, -sign * self.q**i]
            for _ in range(mult):
                new = [0] * (len(out) + 1)
                for a, c in enumerate(out):
                    new[a] += c
                    new[a + 1] += c * lin[1]
                out = new
        return out

    def describe(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for i, sign, mult in self.factors:
            op = "-" if sign == 1 else "+"
            base = f"(1 {op} {self.q**i}T)"
            parts.append(base if mult == 1 else f"{base}^{mult}")
        return "".join(parts)

    def to_json(self) -> list:
        return [{"exponent": i, "sign": "-" if s == 1 else "+", "mult": m} for i, s, m in self.factors]


def _cyclo(q: int, triples) -> CycloPoly:
    return CycloPoly(q, tuple(t for t in triples if t[2] > 0))


def a0_factor(n: int, k: int, q: int) -> CycloPoly:
    return _cyclo(q, [(i, 1, m) for i, m in enumerate(mk_coefficients(n, k))])


# -- orbits ------------------------------------------------------------------------

def shift(i: tuple[int, ...]) -> tuple[int, ...]:
    """(i_0, ..., i_n) -> (i_n, i_0, ..., i_{n-1})."""
    return (i[-1],) + i[:-1]


def weight(i: tuple[int, ...]) -> int:
    return sum(j * c for j, c in enumerate(i))


def v_vector(i: tuple[int, ...]) -> Counter:
    """Signed multiset sum_l (-1)^{i_n + ... + i_{n-l}} e^{sigma^l(i)}, zeros dropped."""
    n = len(i) - 1
    out: Counter = Counter()
    cur = i
    partial = 0
    for ell in range(n + 1):
        partial += i[n - ell]
        out[cur] += -1 if partial % 2 else 1
        cur = shift(cur)
    return Counter({mono: c for mono, c in out.items() if c})


@dataclass
class OrbitData:
    n: int
    k: int
    p: int
    S: list[tuple[int, ...]]
    orbits: list[list[tuple[int, ...]]]
    a: int
    b: int | None = None
    c: int | None = None
    v: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"S": [list(i) for i in self.S], "orbits": [[list(i) for i in o] for o in self.orbits],
                "a": self.a, "b": self.b, "c": self.c}


def orbit_data(n: int, k: int, p: int) -> OrbitData:
    g = cyclotomic_factors_mod_p(n + 1, p)[0]
    S = sym_witnesses(n, k, p, g, limit=10**7)
    Sset = set(S)
    if any(shift(i) not in Sset for i in S):
        raise AssertionError("S_k(n, p) is not stable under the shift")
    seen: set = set()
    orbits = []
    for i in S:
        if i in seen:
            continue
        orb = [i]
        cur = shift(i)
        while cur != i:
            orb.append(cur)
            cur = shift(cur)
        seen.update(orb)
        orbits.append(orb)
    data = OrbitData(n, k, p, S, orbits, len(orbits))
    if n % 2 == 1 and k % 2 == 0:
        b = c = 0
        for orb in orbits:
            vec = v_vector(orb[0])
            data.v.append({str(list(m)): s for m, s in vec.items()})
            if vec:
                b += 1
                if weight(orb[0]) % 2:
                    c += 1
        data.b, data.c = b, c
    return data


# -- A_infty and B ----------------------------------------------------------------

@dataclass
class AInfty:
    factor: CycloPoly
    branch: str
    warnings: list[str] = field(default_factory=list)


def a_infty_factor(n: int, k: int, p: int, a: int = 1, orbits: OrbitData | None = None) -> AInfty:
    q = p**a
    od = orbits or orbit_data(n, k, p)
    if n % 2 == 1 and k % 2 == 1:
        return AInfty(_cyclo(q, []), "n odd, k odd")
    if n % 2 == 0:
        return AInfty(_cyclo(q, [(k * n // 2, 1, od.a)]), "n even")
    e = k * n // 2
    b, c = od.b, od.c
    divides = (q - 1) % (2 * (n + 1)) == 0
    second = (not divides) and ((n + 1) % 4 == 0 or k % 4 == 0)
    third = (not divides) and (n + 1) % 4 == 0 and k % 4 == 0
    warnings = []
    if second and third:
        msg = (f"n={n}, k={k}, q={q}: the conditions of the second and third n-odd/k-even "
               "branches both hold; taking the first matching branch (second)")
        log.warning(msg)
        warnings.append(msg)
    if divides:
        return AInfty(_cyclo(q, [(e, 1, b)]), "2(n+1) | q-1", warnings)
    if second:
        return AInfty(_cyclo(q, [(e, -1, c), (e, 1, b - c)]),
                      "2(n+1) does not divide q-1; 4 | n+1 or 4 | k", warnings)
    if third:  # unreachable as printed, kept for the branch trace
        return AInfty(_cyclo(q, [(e, 1, c), (e, -1, b - c)]),
                      "2(n+1) does not divide q-1; 4 | n+1 and 4 | k", warnings)
    msg = (f"n={n}, k={k}, q={q}: no n-odd/k-even branch applies "
           "(2(n+1) does not divide q-1, 4 divides neither n+1 nor k)")
    log.warning(msg)
    warnings.append(msg)
    if b:
        raise ValueError(msg + f"; b_k = {b} so A_infty is undetermined")
    return AInfty(_cyclo(q, []), "no branch applies; b_k = 0 so A_infty = 1", warnings)


def b_factor(n: int, k: int, p: int, a: int = 1) -> CycloPoly:
    q = p**a
    if p % 2 == 0 and k % 2 == 0 and n % 2 == 0:
        assert (k * n) % 2 == 0
        return _cyclo(q, [(k * n // 2, 1, 1), ((k * n + 2) // 2, 1, 1)])
    return _cyclo(q, [])


@dataclass
class TrivialFactor:
    n: int
    k: int
    p: int
    a: int
    a0: CycloPoly
    a_infty: CycloPoly
    b: CycloPoly
    orbits: OrbitData
    branch: str
    warnings: list[str]

    def ratfunc(self):
        from .lfunction import RatFunc, poly_mul
        return RatFunc.make(poly_mul(self.a0.expand(), self.a_infty.expand()), self.b.expand())

    def cancellation(self) -> list[tuple[int, int]]:
        """Linear factors (exponent, sign) shared by B and A_infty."""
        ainf = {(i, s) for i, s, _ in self.a_infty.factors}
        return [(i, s) for i, s, _ in self.b.factors if (i, s) in ainf]

    def summary(self) -> dict:
        return {"A0": self.a0.describe(), "A_infty": self.a_infty.describe(),
                "B": self.b.describe(), "P": str(self.ratfunc()), "branch": self.branch,
                "m_k": mk_coefficients(self.n, self.k), "orbits": self.orbits.to_json(),
                "cancelled": [list(x) for x in self.cancellation()], "warnings": self.warnings}


def trivial_factor(n: int, k: int, p: int, a: int = 1) -> TrivialFactor:
    q = p**a
    od = orbit_data(n, k, p)
    ainf = a_infty_factor(n, k, p, a, od)
    return TrivialFactor(n, k, p, a, a0_factor(n, k, q), ainf.factor, b_factor(n, k, p, a),
                         od, ainf.branch, ainf.warnings)
