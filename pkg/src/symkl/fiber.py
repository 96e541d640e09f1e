"""Fiber L-factors prod_i (1 - pi_i(t) T) from power sums of Frobenius eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .cyclotomic import CycInt, complex_embeddings, lambda_valuation, DEFAULT_PRECISION
from .expsums import fiber_rows, rows_to_cycints
from .fields import Field, FieldElem, build_dlog, embed, make_field
from .polygons import Polygon, newton_polygon_from_valuations

WEIL_RTOL = 1e-9


def newton_elementary(p_sums: Sequence[CycInt], s_max: int) -> list[CycInt]:
    """e_0..e_{s_max} from power sums p_1.. via s e_s = sum (-1)^{j-1} e_{s-j} p_j."""
    if len(p_sums) < s_max:
        raise ValueError(f"need {s_max} power sums, got {len(p_sums)}")
    pr = p_sums[0].p
    e = [CycInt.one(pr)]
    for s in range(1, s_max + 1):
        acc = CycInt.zero(pr)
        for j in range(1, s + 1):
            term = e[s - j] * p_sums[j - 1]
            acc = acc + term if j % 2 else acc - term
        e.append(acc.exact_div(s))
    return e


@dataclass(frozen=True)
class FiberLFactor:
    """prod_{i=0}^{n} (1 - pi_i(t) T) for a fiber t of degree r over F_q."""

    q: int
    a: int
    r: int
    n: int
    t: FieldElem
    coeffs: tuple[CycInt, ...]

    @property
    def p(self) -> int:
        return self.coeffs[0].p

    @property
    def q_t(self) -> int:
        return self.q**self.r

    def integer_coeffs(self) -> list[int] | None:
        out = []
        for c in self.coeffs:
            if any(c.coeffs[1:]):
                return None
            out.append(c.coeffs[0])
        return out

    def to_json(self) -> dict:
        return {"q": self.q, "r": self.r, "n": self.n, "t": list(self.t.coeffs),
                "coeffs": [c.to_json() for c in self.coeffs]}


def fiber_degree(t: FieldElem, q: int) -> int:
    """Degree over F_q of the closed point containing t."""
    r, y = 1, t ** q
    while y != t:
        y = y ** q
        r += 1
    return r


def fiber_power_sums(q_field: Field, t: FieldElem, n: int, j_max: int,
                     method: str | None = None) -> list[CycInt]:
    """p_j = (-1)^n T(t; q_t^j) for j = 1..j_max, with q_t the size of t's field."""
    src = t.field
    sign = -1 if n % 2 else 1
    out = []
    for j in range(1, j_max + 1):
        big = make_field(src.p, src.d * j, seed=q_field.seed)
        build_dlog(big)
        tb = embed(src, big).map_codes(np.array([t.code]))
        row = fiber_rows(big, tb, n, method=method)[0]
        out.append(rows_to_cycints(row[None, :] * sign, src.p)[0])
    return out


def fiber_polynomial(q_field: Field, t: FieldElem, n: int, method: str | None = None) -> FiberLFactor:
    """Fiber factor at t, where t lives in F_{q^r} = make_field(p, a r)."""
    if t.is_zero():
        raise ValueError("fiber parameter must be a unit")
    a = q_field.d
    if t.field.p != q_field.p or t.field.d % a:
        raise ValueError("t must lie in an extension of q_field")
    r = t.field.d // a
    ps = fiber_power_sums(q_field, t, n, n + 1, method=method)
    e = newton_elementary(ps, n + 1)
    coeffs = tuple(es if s % 2 == 0 else -es for s, es in enumerate(e))
    return FiberLFactor(q_field.size, a, r, n, t, coeffs)


# -- checks ------------------------------------------------------------------------

@dataclass
class FiberReport:
    weil_ok: bool
    weil_margin: float
    moduli: list[float]
    slopes: list[Fraction]
    slope_ok: bool
    unit_ok: bool
    leading_valuation: Fraction | None
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.weil_ok and self.slope_ok and self.unit_ok

    def to_json(self) -> dict:
        return {"weil_ok": self.weil_ok, "weil_margin": self.weil_margin,
                "moduli": self.moduli, "slopes": [str(s) for s in self.slopes],
                "slope_ok": self.slope_ok, "unit_ok": self.unit_ok,
                "leading_valuation": None if self.leading_valuation is None else str(self.leading_valuation),
                "notes": self.notes}


def reciprocal_root_moduli(coeffs: Sequence[CycInt], precision: int = DEFAULT_PRECISION) -> list[float]:
    """|reciprocal roots| of sum c_i T^i under every complex embedding of Z[zeta_p]."""
    embs = [complex_embeddings(c, precision).values for c in coeffs]
    count = len(embs[0])
    moduli = []
    with mpmath.workprec(precision):
        # embedding p - c is the complex conjugate of embedding c: same moduli
        for k in range((count + 1) // 2):
            poly = [embs[i][k] for i in range(len(coeffs))]
            while len(poly) > 1 and poly[-1] == 0:
                poly.pop()
            # reciprocal roots of sum c_i T^i are roots of sum c_i X^{deg - i}
            roots = mpmath.polyroots(poly, maxsteps=200, extraprec=precision)
            mods = [float(abs(z)) for z in roots]
            moduli.extend(mods * (2 if 2 * k + 1 < count else 1))
    return moduli


def fiber_checks(f: FiberLFactor | None = None, *, coeffs: Sequence[CycInt] | None = None,
                 q_t: int | None = None, a_r: int | None = None, n: int | None = None,
                 rtol: float = WEIL_RTOL, precision: int = DEFAULT_PRECISION) -> FiberReport:
    """Weil modulus, q_t-adic slopes 0..n and the l-adic unit proxy for a fiber factor.

    Either pass a FiberLFactor or the raw coefficients with q_t, a_r = log_p(q_t)
    and n (used for negative controls).
    """
    if f is not None:
        coeffs, q_t, a_r, n = f.coeffs, f.q_t, f.a * f.r, f.n
    assert coeffs is not None and q_t is not None and a_r is not None and n is not None
    notes = []
    target = q_t ** (n / 2)
    moduli = reciprocal_root_moduli(coeffs, precision)
    margin = max(abs(m - target) / target for m in moduli) if moduli else float("inf")
    weil_ok = len(moduli) == (n + 1) * max(coeffs[0].p - 1, 1) and margin <= rtol
    if not weil_ok:
        notes.append(f"Weil modulus deviation {margin:.3g} exceeds {rtol:g}")
    vals = [None if c.is_zero() else lambda_valuation(c) / a_r for c in coeffs]
    NP: Polygon = newton_polygon_from_valuations(vals)
    slopes = NP.slope_multiset()
    slope_ok = slopes == [Fraction(i) for i in range(n + 1)] and NP.length == n + 1
    if not slope_ok:
        notes.append(f"slopes {sorted(set(str(s) for s in slopes))} differ from 0..{n}")
    lead = coeffs[-1]
    lead_val = None if lead.is_zero() else lambda_valuation(lead)
    unit_ok = len(coeffs) == n + 2 and lead_val == Fraction(a_r * n * (n + 1), 2)
    if not unit_ok:
        notes.append("leading coefficient does not have valuation of q_t^{n(n+1)/2}")
    return FiberReport(weil_ok, margin, moduli, slopes, slope_ok, unit_ok, lead_val, notes)


# -- closed points -----------------------------------------------------------------

def orbit_representative(t: FieldElem, q: int) -> FieldElem:
    """Orbit element under x -> x^q with the smallest little-endian coefficient vector."""
    best, y = t, t ** q
    while y != t:
        if y.coeffs < best.coeffs:
            best = y
        y = y ** q
    return best


def closed_points(q_field: Field, r: int) -> list[FieldElem]:
    """Representatives of the degree-r closed points of G_m over F_q."""
    F = make_field(q_field.p, q_field.d * r, seed=q_field.seed)
    q = q_field.size
    seen: set[int] = set()
    reps = []
    for x in F.units():
        if x.code in seen:
            continue
        orbit = [x]
        y = x ** q
        while y != x:
            orbit.append(y)
            y = y ** q
        seen.update(z.code for z in orbit)
        if len(orbit) == r:
            reps.append(min(orbit, key=lambda z: z.coeffs))
    return sorted(reps, key=lambda z: z.coeffs)
