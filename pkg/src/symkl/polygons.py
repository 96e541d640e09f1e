"""Hodge numbers, Hodge and q-adic Newton polygons, and their comparison."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

log = logging.getLogger(__name__)

Point = tuple[Fraction, Fraction]


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(points: Sequence[tuple]) -> list[Point]:
    """Lower convex hull, leftmost to rightmost, collinear points dropped."""
    pts = sorted({(Fraction(x), Fraction(y)) for x, y in points})
    # keep the lowest point at each abscissa
    lowest: dict[Fraction, Fraction] = {}
    for x, y in pts:
        if x not in lowest or y < lowest[x]:
            lowest[x] = y
    pts = sorted(lowest.items())
    hull: list[Point] = []
    for pt in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    return hull


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]

    def __post_init__(self):
        vs = self.vertices
        if not vs or vs[0] != (0, 0):
            raise ValueError("polygon must start at (0, 0)")
        for a, b in zip(vs, vs[1:]):
            if not b[0] > a[0]:
                raise ValueError("abscissae must be strictly increasing")
        s = self.slopes()
        if any(b < a for a, b in zip(s, s[1:])):
            raise ValueError("slopes must be nondecreasing")

    @classmethod
    def from_points(cls, points: Sequence[tuple]) -> Polygon:
        return cls(tuple(lower_hull(points)))

    @property
    def length(self) -> Fraction:
        return self.vertices[-1][0]

    @property
    def height(self) -> Fraction:
        return self.vertices[-1][1]

    def slopes(self) -> list[Fraction]:
        vs = self.vertices
        return [(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(vs, vs[1:])]

    def slope_multiset(self) -> list[Fraction]:
        """Slopes repeated by horizontal length (lengths assumed integral)."""
        out = []
        vs = self.vertices
        for (a, b), s in zip(zip(vs, vs[1:]), self.slopes()):
            out.extend([s] * int(b[0] - a[0]))
        return out

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        vs = self.vertices
        if x < 0 or x > self.length:
            raise ValueError(f"{x} outside [0, {self.length}]")
        for a, b in zip(vs, vs[1:]):
            if x <= b[0]:
                return a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
        return vs[-1][1]

    def to_csv(self) -> str:
        return "x,y\n" + "".join(f"{x},{y}\n" for x, y in self.vertices)

    def to_json(self) -> list:
        return [[str(x), str(y)] for x, y in self.vertices]

    def is_lower_convex(self) -> bool:
        vs = list(self.vertices)
        return all(_cross(a, b, c) > 0 for a, b, c in zip(vs, vs[1:], vs[2:]))


# -- Hodge side -------------------------------------------------------------------

@dataclass(frozen=True)
class HodgeData:
    h: tuple[int, ...]
    exact: bool
    remainder: tuple[int, ...] = ()

    @property
    def total(self) -> int:
        return sum(self.h)


def hodge_numbers(R: Sequence[int], n: int) -> HodgeData:
    """Divide R(T) by 1 + T + ... + T^n.

    On a nonzero remainder the truncated quotient series (length deg R - n + 1)
    is returned with ``exact=False``.
    """
    R = list(R)
    while R and R[-1] == 0:
        R.pop()
    rem = list(R)
    qlen = max(len(R) - n, 0)
    quot = [0] * qlen
    for s in range(qlen - 1, -1, -1):
        c = rem[s + n]
        quot[s] = c
        for i in range(n + 1):
            rem[s + i] -= c
    rem = rem[:n]
    exact = not any(rem)
    if not exact:
        log.warning("R(T) is not divisible by 1 + ... + T^%d; Hodge numbers truncated", n)
    while quot and quot[-1] == 0:
        quot.pop()
    return HodgeData(tuple(quot), exact, tuple(rem))


def hodge_polygon(hd: HodgeData) -> Polygon:
    if not hd.exact:
        raise ValueError("Hodge polygon needs an exact division R(T)/(1+...+T^n)")
    pts = [(0, 0)]
    x = y = 0
    for i, hi in enumerate(hd.h):
        x += hi
        y += i * hi
        pts.append((x, y))
    return Polygon.from_points(pts)


# -- Newton side ------------------------------------------------------------------

def ord_p(c: int, p: int) -> int:
    if c == 0:
        raise ValueError("ord of 0")
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def newton_polygon(f: Sequence[int], p: int, a: int = 1) -> Polygon:
    """q-adic Newton polygon of an integer polynomial, q = p^a."""
    f = [int(c) for c in f]
    if not f or f[0] != 1:
        raise ValueError("polynomial must have constant term 1")
    pts = [(i, Fraction(ord_p(c, p), a)) for i, c in enumerate(f) if c != 0]
    return Polygon.from_points(pts)


def newton_polygon_from_valuations(vals: Sequence[Fraction | None]) -> Polygon:
    """Lower hull of (i, vals[i]); ``None`` marks a zero coefficient."""
    return Polygon.from_points([(i, v) for i, v in enumerate(vals) if v is not None])


@dataclass
class Comparison:
    verdict: bool | str
    margins: list[Fraction] = field(default_factory=list)
    detail: str = ""

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "margins": [str(m) for m in self.margins],
                "detail": self.detail}


def lies_on_or_above(NP: Polygon, HP: Polygon) -> Comparison:
    """Is NP >= HP at every integer abscissa?  Margins NP(x) - HP(x) are exact."""
    if NP.length != HP.length:
        return Comparison("incomparable", [],
                          f"lengths differ: NP ends at x={NP.length}, HP at x={HP.length}")
    margins = [NP(x) - HP(x) for x in range(int(NP.length) + 1)]
    ok = all(m >= 0 for m in margins)
    detail = "" if ok else f"NP below HP at x={[x for x, m in enumerate(margins) if m < 0]}"
    return Comparison(ok, margins, detail)


def cyclo_newton_polygon(h: Sequence[int]) -> Polygon:
    """Newton polygon of prod (1 - q^i T)^{h_i} read directly from exponents."""
    pts = [(0, 0)]
    x = y = 0
    for i, hi in enumerate(h):
        x += hi
        y += i * hi
        pts.append((x, y))
    return Polygon.from_points(pts)


def to_svg(polys: dict[str, Polygon], width: int = 480, height: int = 360) -> str:
    """Axis-labeled SVG overlay of a few polygons."""
    xmax = max(float(P.length) for P in polys.values()) or 1.0
    ymax = max(float(P.height) for P in polys.values()) or 1.0
    pad = 40
    sx = (width - 2 * pad) / xmax
    sy = (height - 2 * pad) / ymax
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]

    def pt(x, y):
        return f"{pad + float(x) * sx:.2f},{height - pad - float(y) * sy:.2f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">degree</text>',
             f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
             f'text-anchor="middle">ord_q</text>']
    for k, (name, P) in enumerate(polys.items()):
        c = colors[k % len(colors)]
        pts = " ".join(pt(x, y) for x, y in P.vertices)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="2"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 16 * k}" fill="{c}" text-anchor="end">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
