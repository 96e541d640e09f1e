"""The family L-function L(L Kl_n / F_q, T) as an integer power series, its exact
rational reconstruction, and the split L = P * M against the trivial factor.

Three routes feed the per-fiber traces of the m-th Frobenius at every t in
F_{q^m}^*:

* ``direct``: power sums p_j for j <= m_L straight from exponential sums over
  F_{q^{jm}}.
* ``newton``: p_j for j <= n+1 only, the fiber polynomial by Newton's
  identities, higher power sums from that polynomial.
* ``dual``: p_j for j <= (n+1)//2 only.  The remaining elementary symmetric
  functions follow from |pi_i| = q^{mn/2} in every complex embedding
  (e_{n+1-s} = e_{n+1} conj(e_s) / Q^{ns}) together with
  e_{n+1} = Q^{n(n+1)/2}, Q = q^m.

``auto`` picks the cheapest route whose fields fit under the caps.  The
closed-point product is kept as an independent oracle.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .cyclotomic import CycInt, is_rational_integer
from .expsums import batch_power_sums, rows_to_cycints
from .fields import Field, make_field, size_cap
from .fiber import fiber_polynomial, closed_points
from .linops import (CycVec, LinOp, elementary_from_power_sums, max_power_needed,
                     power_sums_from_elementary, trace_from_power_sums)

log = logging.getLogger(__name__)

GUARD = 3
D_START = 8
D_STEP = 4
D_HARD_CAP = 40
ROUTES = ("direct", "newton", "dual")


class ReconstructionError(ArithmeticError):
    pass


# -- integer polynomials -----------------------------------------------------------

def _trim(f: Sequence[int]) -> list[int]:
    f = list(f)
    while len(f) > 1 and f[-1] == 0:
        f.pop()
    return f


def poly_mul(f: Sequence[int], g: Sequence[int]) -> list[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return _trim(out)


def poly_divmod_q(f: Sequence, g: Sequence) -> tuple[list[Fraction], list[Fraction]]:
    """Division over Q, highest-degree first elimination."""
    f = [Fraction(c) for c in _trim(f)]
    g = [Fraction(c) for c in _trim(g)]
    if not any(g):
        raise ZeroDivisionError("polynomial division by zero")
    if len(f) < len(g):
        return [Fraction(0)], f
    q = [Fraction(0)] * (len(f) - len(g) + 1)
    r = list(f)
    for s in range(len(q) - 1, -1, -1):
        c = r[s + len(g) - 1] / g[-1]
        q[s] = c
        for i, b in enumerate(g):
            r[s + i] -= c * b
    r = r[: len(g) - 1] or [Fraction(0)]
    return _trim(q) if any(q) else [Fraction(0)], r


def poly_gcd_q(f: Sequence, g: Sequence) -> list[Fraction]:
    a, b = [Fraction(c) for c in _trim(f)], [Fraction(c) for c in _trim(g)]
    while any(b):
        _, r = poly_divmod_q(a, b)
        a, b = b, _trim(r)
    return [c / a[0] for c in a] if a[0] else [c / a[-1] for c in a]


def _integralize(f: Sequence[Fraction]) -> list[int]:
    if any(Fraction(c).denominator != 1 for c in f):
        raise ReconstructionError(f"non-integral coefficients {f}")
    return [int(c) for c in f]


@dataclass(frozen=True)
class IntSeries:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("series must start with 1")

    @property
    def D(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, D: int) -> IntSeries:
        return IntSeries(self.coeffs[: D + 1])


@dataclass(frozen=True)
class RatFunc:
    num: tuple[int, ...]
    den: tuple[int, ...]

    @classmethod
    def poly(cls, f: Sequence[int]) -> RatFunc:
        return cls(tuple(_trim(f)), (1,))

    @classmethod
    def make(cls, num: Sequence, den: Sequence) -> RatFunc:
        """Reduce to lowest terms with both constant terms 1."""
        num = [Fraction(c) for c in _trim(num)]
        den = [Fraction(c) for c in _trim(den)]
        if den[0] == 0 or num[0] == 0:
            raise ValueError("constant terms must be nonzero")
        g = poly_gcd_q(num, den)
        if len(g) > 1:
            num, r1 = poly_divmod_q(num, g)
            den, r2 = poly_divmod_q(den, g)
            assert not any(r1) and not any(r2)
        num = [c / num[0] for c in num]
        den = [c / den[0] for c in den]
        return cls(tuple(_integralize(num)), tuple(_integralize(den)))

    @property
    def is_polynomial(self) -> bool:
        return self.den == (1,)

    @property
    def degree(self) -> tuple[int, int]:
        return len(self.num) - 1, len(self.den) - 1

    def series(self, D: int) -> list[int]:
        """Taylor coefficients up to T^D (den has constant term 1)."""
        out = []
        for i in range(D + 1):
            acc = self.num[i] if i < len(self.num) else 0
            for j in range(1, min(i, len(self.den) - 1) + 1):
                acc -= self.den[j] * out[i - j]
            out.append(acc)
        return out

    def __mul__(self, other: RatFunc) -> RatFunc:
        return RatFunc.make(poly_mul(self.num, other.num), poly_mul(self.den, other.den))

    def __truediv__(self, other: RatFunc) -> RatFunc:
        return RatFunc.make(poly_mul(self.num, other.den), poly_mul(self.den, other.num))

    def to_json(self) -> dict:
        return {"num": [str(c) for c in self.num], "den": [str(c) for c in self.den]}

    def __str__(self) -> str:
        def fmt(f):
            terms = []
            for i, c in enumerate(f):
                if c:
                    terms.append(f"{c}" if i == 0 else f"{c}*T^{i}" if i > 1 else f"{c}*T")
            return " + ".join(terms).replace("+ -", "- ")
        return fmt(self.num) if self.is_polynomial else f"({fmt(self.num)}) / ({fmt(self.den)})"


# -- power series ------------------------------------------------------------------

def exp_series(c: Sequence[int]) -> IntSeries:
    """exp(sum c_m T^m / m) via m a_m = sum_{j=1}^m c_j a_{m-j}."""
    a = [1]
    for m in range(1, len(c) + 1):
        s = sum(int(c[j - 1]) * a[m - j] for j in range(1, m + 1))
        if s % m:
            raise ArithmeticError(f"coefficient a_{m} = {s}/{m} is not an integer")
        a.append(s // m)
    return IntSeries(tuple(a))


def log_of_series(a: Sequence[int]) -> list[int]:
    """Inverse of exp_series: c_m from a_0 = 1, a_1, ..."""
    c = []
    for m in range(1, len(a)):
        s = m * a[m] - sum(c[j - 1] * a[m - j] for j in range(1, m))
        c.append(s)
    return c


def _solve_q(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """A solution of an overdetermined system over Q, or None if inconsistent."""
    ncols = len(rows[0]) if rows else 0
    M = [r[:] + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = 1 / M[r][col]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col] != 0:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv_cols.append(col)
        r += 1
    if any(all(x == 0 for x in row[:-1]) and row[-1] != 0 for row in M):
        return None
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(piv_cols):
        sol[col] = M[i][-1]
    return sol


def reconstruct(series: IntSeries, num_deg: int, den_deg: int, guard: int = GUARD) -> RatFunc:
    """Smallest-denominator num/den with num/den = series mod T^{D+1}."""
    a = [Fraction(x) for x in series.coeffs]
    D = series.D
    if D < num_deg + den_deg + guard:
        raise ReconstructionError(
            f"need D >= {num_deg + den_deg + guard} for bounds ({num_deg}, {den_deg}), have D={D}")
    for e in range(den_deg + 1):
        # unknowns b_1..b_e; equations sum_{j=0}^e b_j a_{i-j} = 0 for num_deg < i <= D
        rows, rhs = [], []
        for i in range(num_deg + 1, D + 1):
            rows.append([a[i - j] if i - j >= 0 else Fraction(0) for j in range(1, e + 1)])
            rhs.append(-a[i])
        sol = _solve_q(rows, rhs) if e else ([] if all(x == 0 for x in rhs) else None)
        if sol is None:
            continue
        den = [Fraction(1)] + sol
        num = [sum(den[j] * a[i - j] for j in range(0, min(i, e) + 1)) for i in range(num_deg + 1)]
        try:
            rf = RatFunc.make(num, den)
        except ReconstructionError:
            continue
        if rf.series(D) != list(series.coeffs):
            continue
        return rf
    raise ReconstructionError(
        f"no rational function with degrees <= ({num_deg}, {den_deg}) matches {D + 1} coefficients; raise D")


# -- log coefficients --------------------------------------------------------------

def _route_fields(route: str, m: int, n: int, op: LinOp) -> int:
    """Largest extension degree (over F_q) the route needs at level m."""
    if route == "direct":
        return m * max_power_needed(op)
    if route == "newton":
        return m * (n + 1)
    return m * max(1, (n + 1) // 2)


def choose_route(q_field: Field, m: int, n: int, op: LinOp, cap: int | None = None) -> str:
    cap = size_cap() if cap is None else cap
    a = q_field.d
    # prefer the cheapest feasible route; the others are used by cross-checks
    cost = {r: q_field.p ** (a * _route_fields(r, m, n, op)) for r in ROUTES}
    feasible = [r for r in ROUTES if cost[r] <= cap]
    if not feasible:
        raise ValueError(f"level m={m}: every route needs a field above the cap {cap}")
    return min(feasible, key=lambda r: (cost[r], ROUTES.index(r)))


def fiber_elementary(q_field: Field, m: int, n: int, route: str, method: str | None = None,
                     cache=None) -> list[CycVec]:
    """e_0..e_{n+1} of the m-th Frobenius eigenvalues at every t in F_{q^m}^*."""
    p = q_field.p
    if route == "newton":
        tab = batch_power_sums(q_field, m, n + 1, n, method=method, cache=cache)
        ps = [CycVec.from_rows(p, tab.sums[:, j]) for j in range(n + 1)]
        one = CycVec.constant(p, 1, len(tab))
        return elementary_from_power_sums(ps, n + 1, one)
    if route != "dual":
        raise ValueError(f"route {route!r} has no elementary-function stage")
    h = max(1, (n + 1) // 2)
    tab = batch_power_sums(q_field, m, h, n, method=method, cache=cache)
    N = len(tab)
    ps = [CycVec.from_rows(p, tab.sums[:, j]) for j in range(h)]
    one = CycVec.constant(p, 1, N)
    e = elementary_from_power_sums(ps, h, one)
    Q = q_field.size**m
    top = CycVec.constant(p, Q ** (n * (n + 1) // 2), N)
    full: list = e + [None] * (n + 1 - h)
    full[n + 1] = top
    for s2 in range(h + 1, n + 1):
        s = n + 1 - s2
        full[s2] = (top * e[s].conjugate(-1)).exact_div(Q ** (n * s))
    return full


def fiber_traces(q_field: Field, m: int, n: int, op: LinOp, route: str,
                 method: str | None = None, cache=None) -> CycVec:
    """Tr L(m-Frobenius at t) for every t in F_{q^m}^*, as a batch."""
    p = q_field.p
    need = max_power_needed(op)
    if route == "direct":
        tab = batch_power_sums(q_field, m, need, n, method=method, cache=cache)
        ps = [CycVec.from_rows(p, tab.sums[:, j]) for j in range(need)]
        one = CycVec.constant(p, 1, len(tab))
        return trace_from_power_sums(op, ps, one)
    e = fiber_elementary(q_field, m, n, route, method=method, cache=cache)
    zero = CycVec.constant(p, 0, len(e[0]))
    ps = power_sums_from_elementary(e, need, zero)
    return trace_from_power_sums(op, ps, e[0])


@dataclass
class LogCoefficients:
    c: list[int]
    routes: list[str]
    seconds: list[float]


def log_coefficients(q_field: Field, n: int, op: LinOp, D: int, route: str = "auto",
                     method: str | None = None, cache=None,
                     known: Sequence[int] = ()) -> LogCoefficients:
    """c_m = sum_{t in F_{q^m}^*} Tr L(m-Frobenius at t), m = 1..D.

    ``known`` supplies already computed c_1.. (used when D is raised).
    """
    op.check_dimension(n)
    c = list(known[:D])
    routes = ["known"] * len(c)
    secs = [0.0] * len(c)
    for m in range(len(c) + 1, D + 1):
        t0 = time.perf_counter()
        r = choose_route(q_field, m, n, op) if route == "auto" else route
        total = fiber_traces(q_field, m, n, op, r, method=method, cache=cache).total()
        value = is_rational_integer(CycInt(q_field.p, tuple(total)))
        if value is None:
            raise ArithmeticError(f"c_{m} = {total} is not a rational integer")
        c.append(value)
        routes.append(r)
        secs.append(time.perf_counter() - t0)
        log.info("c_%d = %d via %s (%.2fs)", m, value, r, secs[-1])
    return LogCoefficients(c, routes, secs)


# -- closed-point oracle -----------------------------------------------------------

def _cyc_exp(c: list[CycInt], D: int, p: int) -> list[CycInt]:
    a = [CycInt.one(p)]
    for m in range(1, D + 1):
        s = CycInt.zero(p)
        for j in range(1, m + 1):
            if j - 1 < len(c):
                s = s + c[j - 1] * a[m - j]
        a.append(s.exact_div(m))
    return a


def closed_point_series(q_field: Field, n: int, op: LinOp, D: int,
                        method: str | None = None) -> IntSeries:
    """prod over closed points x of deg <= D of 1/det(1 - L(F_x) T^{deg x}), mod T^{D+1}.

    Each fiber factor comes from its own power sums over F_{q^{r j}}, j <= n+1.
    """
    p = q_field.p
    need = max_power_needed(op)
    acc = [CycInt.one(p)] + [CycInt.zero(p)] * D
    for r in range(1, D + 1):
        top = D // r
        for t in closed_points(q_field, r):
            f = fiber_polynomial(q_field, t, n, method=method)
            e = [c if s % 2 == 0 else -c for s, c in enumerate(f.coeffs)]
            ps = power_sums_from_elementary(e, top * need, CycInt.zero(p))
            # traces of L(F^j) for j = 1..top
            logc = [trace_from_power_sums(op, [ps[j * i - 1] for i in range(1, need + 1)],
                                          CycInt.one(p)) for j in range(1, top + 1)]
            local = _cyc_exp(logc, top, p)
            spread = [CycInt.zero(p)] * (D + 1)
            for j, v in enumerate(local):
                spread[j * r] = v
            acc = [sum((acc[i] * spread[k - i] for i in range(k + 1)), CycInt.zero(p))
                   for k in range(D + 1)]
    ints = [is_rational_integer(v) for v in acc]
    if any(v is None for v in ints):
        raise ArithmeticError("closed-point product is not a rational series")
    return IntSeries(tuple(ints))


# -- assembly ----------------------------------------------------------------------

@dataclass
class Assembly:
    q: int
    n: int
    op: str
    L: RatFunc
    P: RatFunc | None
    M: RatFunc | None
    series: IntSeries
    c: list[int]
    D: int
    bounds: tuple[int, int]
    stable: bool
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"q": self.q, "n": self.n, "op": self.op, "L": self.L.to_json(),
                "P": None if self.P is None else self.P.to_json(),
                "M": None if self.M is None else self.M.to_json(),
                "series": [str(a) for a in self.series.coeffs], "c": [str(x) for x in self.c],
                "D": self.D, "bounds": list(self.bounds), "stable": self.stable,
                "diagnostics": self.diagnostics}


def weil_check(f: Sequence[int], q: int, weight: int, rtol: float = 1e-9,
               precision: int = 128) -> tuple[bool, float, list[float]]:
    """Do all reciprocal roots of the integer polynomial f have modulus q^{weight/2}?"""
    f = _trim(f)
    if len(f) == 1:
        return True, 0.0, []
    with mpmath.workprec(precision):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in f], maxsteps=400, extraprec=2 * precision)
        target = mpmath.mpf(q) ** (mpmath.mpf(weight) / 2)
        # polyroots reads coefficients highest degree first, so the ascending
        # list of f yields the reciprocal roots directly
        moduli = [abs(z) for z in roots]
        margin = max(float(abs(m - target) / target) for m in moduli)
    return margin <= rtol, margin, [float(m) for m in moduli]


def sym_bounds(n: int, k: int, q_field: Field, P_parts) -> tuple[int, int]:
    """Deterministic (num_deg, den_deg) for Sym^k when d_k(n, p) = 0."""
    deg_main = math.comb(n + k, n) // (n + 1)
    num_deg = P_parts.a0.degree + P_parts.a_infty.degree + deg_main
    den_deg = 1 if (q_field.p % 2 == 0 and n % 2 == 0 and k % 2 == 0) else 0
    return num_deg, den_deg


def assemble(q_field: Field, n: int, op: LinOp, D: int | None = None, route: str = "auto",
             method: str | None = None, cache=None, den_max: int = 4,
             stability_step: int = 2) -> Assembly:
    """Compute L, the trivial factor P (Sym^k only) and M = L / P."""
    from .linops import d_obstruction
    from .trivial import trivial_factor

    k = op.is_sym()
    diag: dict = {}
    obst = d_obstruction(op, n, q_field.p)
    diag["d"] = obst.count
    P_parts = None
    if k is not None:
        try:
            P_parts = trivial_factor(n, k, q_field.p, q_field.d)
        except ValueError as exc:
            if obst.count == 0:
                raise
            diag["trivial_error"] = str(exc)
    if k is not None and obst.count == 0:
        num_deg, den_deg = sym_bounds(n, k, q_field, P_parts)
        D0 = num_deg + den_deg + GUARD if D is None else D
        lc = log_coefficients(q_field, n, op, D0 + stability_step, route, method, cache)
        full = exp_series(lc.c)
        L = reconstruct(full.truncate(D0), num_deg, den_deg)
        L2 = reconstruct(full, num_deg, den_deg)
        stable = L == L2
        D_used, bounds = D0, (num_deg, den_deg)
    else:
        D_used = D or D_START
        known: list[int] = []
        prev = None
        stable = False
        while True:
            lc = log_coefficients(q_field, n, op, D_used, route, method, cache, known=known)
            known = lc.c
            full = exp_series(lc.c)
            cur = None
            for e in range(den_max + 1):
                try:
                    cur = reconstruct(full, D_used - e - GUARD, e)
                    bounds = (D_used - e - GUARD, e)
                    break
                except ReconstructionError:
                    continue
            if cur is not None and prev is not None and cur == prev:
                stable = True
                break
            prev = cur
            if D_used + D_STEP > D_HARD_CAP:
                break
            D_used += D_STEP
        if prev is None:
            raise ReconstructionError(f"no reconstruction up to D={D_used}")
        L = prev
        diag["adaptive"] = True
    diag["routes"] = lc.routes
    diag["seconds"] = [round(s, 3) for s in lc.seconds]
    P = M = None
    if P_parts is not None:
        P = P_parts.ratfunc()
        M = L / P
        diag["M_is_polynomial"] = M.is_polynomial
        if M.is_polynomial:
            ok, margin, _ = weil_check(M.num, q_field.size, k * n + 1)
            diag["M_weil_ok"] = ok
            diag["M_weil_margin"] = margin
        diag["trivial"] = P_parts.summary()
    return Assembly(q_field.size, n, op.name, L, P, M, full, lc.c, D_used, bounds, stable, diag)
