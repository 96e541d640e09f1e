"""End-to-end verification pipeline for one (p, a, n, op) configuration.

Stages run in order: obstruction count, trivial factor, a sample fiber,
L-function assembly, division by the trivial factor, degree, Hodge numbers,
polygon comparison and the reduced-cohomology cross-checks.  Each stage
appends claim records; a submodule exception aborts the run as a
:class:`StageError` naming the stage.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .cache import Cache
from .config import RunConfig
from .fiber import fiber_checks, fiber_polynomial
from .fields import make_field
from .lfunction import Assembly, assemble, weil_check
from .linops import d_obstruction, r_poly
from .polygons import hodge_numbers, hodge_polygon, lies_on_or_above, newton_polygon
from .redcoh import coker_dimensions, constant_basis, injectivity_report

PASS, FAIL, SKIP = "pass", "fail", "skip"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Claim:
    id: str
    anchor: str
    parameters: dict
    verdict: str
    margins: list = field(default_factory=list)
    runtime: float = 0.0
    detail: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "parameters": self.parameters,
                "verdict": self.verdict, "margins": [str(m) for m in self.margins],
                "runtime": round(self.runtime, 4), "detail": self.detail}


@dataclass
class VerificationReport:
    config: dict
    claims: list[Claim] = field(default_factory=list)
    results: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.verdict != FAIL for c in self.claims)

    def claim(self, cid: str) -> Claim:
        for c in self.claims:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_json(self) -> dict:
        return {"config": self.config, "ok": self.ok,
                "claims": [c.to_json() for c in self.claims], "results": self.results}

    def to_csv(self, timings: bool = False) -> str:
        rows = ["id,verdict," + ("runtime," if timings else "") + "anchor,detail"]
        for c in self.claims:
            detail = c.detail.replace('"', "'")
            rt = f"{c.runtime:.4f}," if timings else ""
            rows.append(f'{c.id},{c.verdict},{rt}"{c.anchor}","{detail}"')
        return "\n".join(rows) + "\n"


ANCHORS = {
    "obstruction": "acyclicity hypothesis d(n, p) = 0, counted over compositions",
    "obstruction-invariance": "d(n, p) independent of the cyclotomic factor mod p",
    "trivial-orbits": "d = 0 forces S_k(n, p) empty and A_infty = 1",
    "fiber": "fiber factor: Weil numbers with slopes 0..n",
    "integrality": "log coefficients c_m are rational integers",
    "stability": "rational reconstruction stable when two more coefficients are added",
    "trivial-division": "L / P is an integral polynomial",
    "degree": "under d = 0, L is a polynomial of degree #J / (n+1)",
    "weil-M": "reciprocal roots of L / P are pure of weight nk + 1",
    "hodge": "Hodge numbers are the coefficients of R(T) / (1 + T + ... + T^n)",
    "newton-above-hodge": "q-adic Newton polygon of L lies on or above the Hodge polygon",
    "sharpness": "p = 2, k odd: Newton polygon of L equals the Hodge polygon",
    "redcoh-injective": "nabla injective on every weight block iff d_k = 0",
    "redcoh-dims": "weight-graded cokernel dimensions equal the Hodge numbers",
    "redcoh-basis": "constant basis B_k has #J / (n+1) elements",
}


class _Recorder:
    def __init__(self, report: VerificationReport, params: dict):
        self.report = report
        self.params = params

    @contextmanager
    def stage(self, name: str):
        try:
            yield
        except StageError:
            raise
        except Exception as exc:  # surfaced with the stage name
            raise StageError(name, exc) from exc

    def add(self, cid: str, verdict: str | bool, t0: float, margins=(), detail: str = "") -> Claim:
        if isinstance(verdict, bool):
            verdict = PASS if verdict else FAIL
        c = Claim(cid, ANCHORS[cid], self.params, verdict, list(margins),
                  time.perf_counter() - t0, detail)
        self.report.claims.append(c)
        return c

    def skip(self, cid: str, reason: str) -> None:
        self.add(cid, SKIP, time.perf_counter(), detail=reason)


def run_verification(cfg: RunConfig, cache: Cache | None = None) -> VerificationReport:
    cfg.validate()
    cfg.apply_caps()
    if cache is None and cfg.cache_dir:
        cache = Cache(cfg.cache_dir)
    op = cfg.linop
    k = op.is_sym()
    n, p, a = cfg.n, cfg.p, cfg.a
    report = VerificationReport(cfg.to_json())
    rec = _Recorder(report, {"p": p, "a": a, "n": n, "op": op.name})
    F = make_field(p, a, seed=cfg.seed)
    J = op.index_count(n)

    with rec.stage("obstruction"):
        t0 = time.perf_counter()
        obst = d_obstruction(op, n, p)
        d = obst.count
        report.results["d"] = obst.to_json()
        rec.add("obstruction", PASS, t0, [d],
                f"d = {d}" + ("" if d == 0 else f"; witnesses {obst.witnesses[:4]}"))
        rec.add("obstruction-invariance", obst.invariant, t0, obst.counts_by_factor,
                f"counts by factor {obst.counts_by_factor}")
    hypothesis = d == 0
    why_skip = f"d = {d} != 0, hypothesis fails"

    P_parts = None
    with rec.stage("trivial"):
        if k is not None:
            from .trivial import trivial_factor
            t0 = time.perf_counter()
            P_parts = trivial_factor(n, k, p, a)
            report.results["trivial"] = P_parts.summary()
            if hypothesis:
                ok = not P_parts.orbits.S and P_parts.a_infty.degree == 0
                rec.add("trivial-orbits", ok, t0, [len(P_parts.orbits.S)],
                        f"#S_k = {len(P_parts.orbits.S)}, A_infty = {P_parts.a_infty.describe()}")
            else:
                rec.skip("trivial-orbits", why_skip)
        else:
            rec.skip("trivial-orbits", "trivial factor is defined for Sym^k only")

    with rec.stage("fiber"):
        t0 = time.perf_counter()
        t = F(list(cfg.t))
        if t.is_zero():
            raise ValueError("fiber parameter t must be nonzero")
        fp = fiber_polynomial(F, t, n, method=cfg.method)
        rep = fiber_checks(fp, precision=cfg.precision)
        report.results["fiber"] = {"t": list(cfg.t), "coeffs": [c.to_json() for c in fp.coeffs],
                                   "checks": rep.to_json()}
        rec.add("fiber", rep.ok, t0, [rep.weil_margin], "; ".join(rep.notes))

    with rec.stage("lfunction"):
        t0 = time.perf_counter()
        A: Assembly = assemble(F, n, op, D=cfg.max_degree, route=cfg.route,
                               method=cfg.method, cache=cache)
        report.results["lfunction"] = A.to_json()
        rec.add("integrality", True, t0, [], f"c_1..c_{len(A.c)} integral; L = {A.L}")
        rec.add("stability", A.stable, t0, [A.D], f"D = {A.D}, bounds {A.bounds}")

    L = A.L
    with rec.stage("division"):
        t0 = time.perf_counter()
        if A.M is not None:
            rec.add("trivial-division", A.M.is_polynomial, t0, [],
                    f"P = {A.P}, L / P = {A.M}")
            if A.M.is_polynomial:
                ok, margin, _ = weil_check(A.M.num, F.size, k * n + 1, precision=cfg.precision)
                verdict = ok if hypothesis or ok else SKIP
                rec.add("weil-M", verdict, t0, [margin], f"deg(L / P) = {A.M.degree[0]}")
            else:
                rec.skip("weil-M", "L / P is not a polynomial")
        else:
            rec.skip("trivial-division", "trivial factor is defined for Sym^k only")
            rec.skip("weil-M", "trivial factor is defined for Sym^k only")

    with rec.stage("degree"):
        t0 = time.perf_counter()
        target = J // (n + 1) if J % (n + 1) == 0 else None
        if hypothesis:
            ok = L.is_polynomial and target is not None and L.degree[0] == target
            rec.add("degree", ok, t0, [L.degree[0] - (target or 0)],
                    f"deg L = {L.degree[0]}, #J / (n+1) = {J}/{n + 1}; deg(L / P) = "
                    f"{None if A.M is None else A.M.degree}")
        else:
            rec.skip("degree", why_skip)

    with rec.stage("hodge"):
        t0 = time.perf_counter()
        hd = hodge_numbers(r_poly(op, n).coeffs, n)
        report.results["hodge"] = {"h": list(hd.h), "exact": hd.exact, "remainder": list(hd.remainder)}
        if hypothesis:
            rec.add("hodge", hd.exact and hd.total == (target or -1), t0, list(hd.remainder),
                    f"h = {list(hd.h)}")
        else:
            rec.add("hodge", PASS if hd.exact else SKIP, t0, list(hd.remainder), f"h = {list(hd.h)}")

    with rec.stage("polygons"):
        t0 = time.perf_counter()
        if hypothesis and hd.exact and L.is_polynomial:
            NP = newton_polygon(L.num, p, a)
            HP = hodge_polygon(hd)
            cmp = lies_on_or_above(NP, HP)
            report.results["polygons"] = {"NP": NP.to_json(), "HP": HP.to_json(),
                                          "comparison": cmp.to_json()}
            rec.add("newton-above-hodge", cmp.verdict is True, t0, cmp.margins, cmp.detail)
            if p == 2 and k is not None and k % 2 == 1:
                rec.add("sharpness", NP.vertices == HP.vertices, t0, cmp.margins,
                        f"NP {NP.to_json()} HP {HP.to_json()}")
        else:
            rec.skip("newton-above-hodge", why_skip if not hypothesis else "L is not a polynomial")

    with rec.stage("redcoh"):
        t0 = time.perf_counter()
        if k is None:
            rec.skip("redcoh-injective", "graded module is built for Sym^k only")
        else:
            inj = injectivity_report(n, k, p)
            report.results["redcoh"] = {"injectivity": inj.to_json()}
            rec.add("redcoh-injective", inj.injective == hypothesis, t0, [],
                    f"injective = {inj.injective}, d = {d}")
            if hypothesis:
                dims = coker_dimensions(n, k, p)
                while dims and dims[-1] == 0:
                    dims.pop()
                basis = constant_basis(n, k, p)
                report.results["redcoh"].update(dims=dims, basis=[list(i) for i in basis])
                if hd.exact:
                    rec.add("redcoh-dims", dims == list(hd.h), t0, [], f"dims = {dims}")
                else:
                    rec.skip("redcoh-dims", "R(T) / (1 + ... + T^n) is not exact")
                rec.add("redcoh-basis", len(basis) == math.comb(n + k, n) // (n + 1), t0,
                        [], f"B_k = {[list(i) for i in basis]}")
    return report
