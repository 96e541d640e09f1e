"""Command-line front end: ``symkl <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cache import Cache
from .config import METHODS, OUTPUT_FORMATS, ROUTES, ConfigError, RunConfig
from .verify import StageError

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _digits(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coefficient vector {text!r}") from exc


def _common(sp: argparse.ArgumentParser, field_args: bool = True) -> None:
    if field_args:
        sp.add_argument("--p", type=int, default=2, help="characteristic")
        sp.add_argument("--a", type=int, default=1, help="q = p^a")
    sp.add_argument("--n", type=int, default=1, help="n of Kl_n (rank n + 1)")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, help="symmetric power k (same as --op sym:k)")
    g.add_argument("--op", help='linear-algebra operation, e.g. "sym:3" or "ext:2*sym:1"')
    sp.add_argument("--max-degree", type=int, help="number of series coefficients D")
    sp.add_argument("--cap", type=int, help="field size cap (env SYMKL_FIELD_CAP)")
    sp.add_argument("--work-cap", type=int, help="character-evaluation budget (env SYMKL_WORK_CAP)")
    sp.add_argument("--cache-dir", help="cache root (env SYMKL_CACHE_DIR)")
    sp.add_argument("--out", choices=OUTPUT_FORMATS, default="json")
    sp.add_argument("--svg", help="write a polygon plot to this path")
    sp.add_argument("--precision", type=int, help="bits for complex embeddings")
    sp.add_argument("--seed", type=int, help="seed for the choice of defining polynomials")
    sp.add_argument("--method", choices=[m for m in METHODS if m], help="fiber-sum method")
    sp.add_argument("--route", choices=ROUTES, default="auto", help="route for fiber data")
    sp.add_argument("--timings", action="store_true", help="include wall-clock timings")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symkl", description="Symmetric power L-functions of "
                                 "hyper-Kloosterman sums over small finite fields.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("verify", help="run the full verification pipeline"))
    _common(sub.add_parser("lfunction", help="L-function, trivial factor and L / P"))
    sp = sub.add_parser("fiber", help="fiber factor at t in F_q")
    _common(sp)
    sp.add_argument("--t", type=_digits, default=(1,), help="t as little-endian digits, e.g. 1,0")
    _common(sub.add_parser("trivial", help="trivial factor P = A0 A_infty / B"))
    _common(sub.add_parser("hodge", help="Hodge numbers and polygon"), field_args=False)
    sp = sub.add_parser("redcoh", help="reduced cohomology over F_q[t]")
    _common(sp)
    sp.add_argument("--basis", action="store_true", help="include the constant basis B_k")
    sp.add_argument("--dims", action="store_true", help="include graded cokernel dimensions")
    sp = sub.add_parser("scan", help="primes p <= pmax with d_k(n, p) != 0")
    _common(sp, field_args=False)
    sp.add_argument("--pmax", type=int, default=50)
    _common(sub.add_parser("dk", help="obstruction count d(n, p) with witnesses"))
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    kw = {}
    for name in ("p", "a", "n", "seed", "precision"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if args.k is not None:
        kw["op"] = f"sym:{args.k}"
    elif args.op is not None:
        kw["op"] = args.op
    if args.cap is not None:
        kw["field_cap"] = args.cap
    if args.work_cap is not None:
        kw["work_cap"] = args.work_cap
    if args.cache_dir is not None:
        kw["cache_dir"] = args.cache_dir
    if getattr(args, "t", None) is not None:
        kw["t"] = tuple(args.t)
    kw.update(out=args.out, max_degree=args.max_degree, method=args.method,
              route=args.route, svg=args.svg)
    return RunConfig(**kw).validate()


def _strip_timings(obj):
    if isinstance(obj, dict):
        return {k: _strip_timings(v) for k, v in obj.items() if k not in ("runtime", "seconds")}
    if isinstance(obj, list):
        return [_strip_timings(v) for v in obj]
    return obj


def _write_svg(path: str, polys: dict) -> None:
    from .polygons import to_svg
    Path(path).write_text(to_svg(polys))


# -- subcommands -----------------------------------------------------------------

def cmd_verify(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .polygons import Polygon
    from .verify import run_verification
    rep = run_verification(cfg)
    if cfg.svg and "polygons" in rep.results:
        pg = rep.results["polygons"]
        _write_svg(cfg.svg, {"Newton": Polygon.from_points(pg["NP"]),
                             "Hodge": Polygon.from_points(pg["HP"])})
    return rep.to_json(), rep.to_csv(args.timings), EXIT_OK if rep.ok else EXIT_FAIL


def cmd_lfunction(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .fields import make_field
    from .lfunction import assemble
    cache = Cache(cfg.cache_dir) if cfg.cache_dir else None
    A = assemble(make_field(cfg.p, cfg.a, seed=cfg.seed), cfg.n, cfg.linop, D=cfg.max_degree,
                 route=cfg.route, method=cfg.method, cache=cache)
    res = A.to_json()
    if cfg.svg and A.L.is_polynomial:
        from .polygons import newton_polygon
        polys = {"Newton(L)": newton_polygon(A.L.num, cfg.p, cfg.a)}
        if A.M is not None and A.M.is_polynomial and len(A.M.num) > 1:
            polys["Newton(L/P)"] = newton_polygon(A.M.num, cfg.p, cfg.a)
        _write_svg(cfg.svg, polys)
    csv = ["m,c_m,series_m"] + [f"{m},{c},{A.series.coeffs[m]}" for m, c in enumerate(A.c, start=1)]
    return res, "\n".join(csv) + "\n", EXIT_OK


def cmd_fiber(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .fiber import fiber_checks, fiber_polynomial
    from .fields import make_field
    from .lfunction import RatFunc
    F = make_field(cfg.p, cfg.a, seed=cfg.seed)
    t = F(list(cfg.t))
    if t.is_zero():
        raise ValueError("t must be nonzero")
    f = fiber_polynomial(F, t, cfg.n, method=cfg.method)
    rep = fiber_checks(f, precision=cfg.precision)
    ints = f.integer_coeffs()
    res = {"t": list(t.coeffs), "field": F.to_record(), "coeffs": [c.to_json() for c in f.coeffs],
           "integer_coeffs": ints, "polynomial": None if ints is None else str(RatFunc.poly(ints)),
           "checks": rep.to_json()}
    csv = ["i,coefficient"] + [f'{i},"{c}"' for i, c in enumerate(f.coeffs)]
    return res, "\n".join(csv) + "\n", EXIT_OK if rep.ok else EXIT_FAIL


def cmd_trivial(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .trivial import trivial_factor
    k = _need_sym(cfg)
    tf = trivial_factor(cfg.n, k, cfg.p, cfg.a)
    res = tf.summary()
    res.update(A0_factors=tf.a0.to_json(), A_infty_factors=tf.a_infty.to_json(),
               B_factors=tf.b.to_json(), P_ratfunc=tf.ratfunc().to_json())
    csv = ["part,exponent,sign,mult"]
    for name, part in (("A0", tf.a0), ("A_infty", tf.a_infty), ("B", tf.b)):
        csv += [f"{name},{i},{'-' if s == 1 else '+'},{m}" for i, s, m in part.factors]
    return res, "\n".join(csv) + "\n", EXIT_OK


def cmd_hodge(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .linops import r_poly
    from .polygons import hodge_numbers, hodge_polygon
    R = r_poly(cfg.linop, cfg.n).coeffs
    hd = hodge_numbers(R, cfg.n)
    res = {"R": list(R), "h": list(hd.h), "exact": hd.exact, "remainder": list(hd.remainder)}
    csv = ""
    if hd.exact:
        HP = hodge_polygon(hd)
        csv = HP.to_csv()
        res.update(polygon=HP.to_json(), csv=csv)
        if cfg.svg:
            _write_svg(cfg.svg, {"Hodge": HP})
    return res, csv, EXIT_OK if hd.exact else EXIT_FAIL


def cmd_redcoh(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .redcoh import coker_dimensions, constant_basis, injectivity_report
    k = _need_sym(cfg)
    inj = injectivity_report(cfg.n, k, cfg.p)
    res = {"injectivity": inj.to_json()}
    dims = coker_dimensions(cfg.n, k, cfg.p)
    if args.dims or not args.basis:
        res["dims"] = dims
    if args.basis:
        res["basis"] = [list(i) for i in constant_basis(cfg.n, k, cfg.p)] if inj.injective else None
    csv = ["weight,dim"] + [f"{N},{d}" for N, d in enumerate(dims)]
    return res, "\n".join(csv) + "\n", EXIT_OK


def cmd_scan(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .linops import scan_prime_power
    k = _need_sym(cfg)
    bad = scan_prime_power(cfg.n, k, args.pmax)
    res = {"n": cfg.n, "k": k, "pmax": args.pmax, "primes": bad}
    return res, "p\n" + "".join(f"{p}\n" for p in bad), EXIT_OK


def cmd_dk(cfg: RunConfig, args) -> tuple[dict, str, int]:
    from .linops import d_obstruction
    ob = d_obstruction(cfg.linop, cfg.n, cfg.p)
    csv = ["witness"] + ['"' + ",".join(map(str, w)) + '"' for w in ob.witnesses]
    return ob.to_json(), "\n".join(csv) + "\n", EXIT_OK


def _need_sym(cfg: RunConfig) -> int:
    k = cfg.linop.is_sym()
    if k is None:
        raise ConfigError("this subcommand needs a symmetric power (--k or --op sym:k)")
    return k


COMMANDS = {"verify": cmd_verify, "lfunction": cmd_lfunction, "fiber": cmd_fiber,
            "trivial": cmd_trivial, "hodge": cmd_hodge, "redcoh": cmd_redcoh,
            "scan": cmd_scan, "dk": cmd_dk}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        cfg.apply_caps()
        result, csv, code = COMMANDS[args.command](cfg, args)
    except (ConfigError, StageError, ValueError, ArithmeticError, RuntimeError) as exc:
        err = {"command": args.command, "error": f"{type(exc).__name__}: {exc}"}
        if isinstance(exc, StageError):
            err["stage"] = exc.stage
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return EXIT_ERROR
    if cfg.out == "csv":
        sys.stdout.write(csv)
    else:
        doc = {"command": args.command, "config": cfg.to_json(), "result": result}
        if not args.timings:
            doc = _strip_timings(doc)
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
