"""On-disk cache for fiber power sums, field records and discrete-log tables.

Layout under the cache root:

    fields/p{p}_d{d}_s{seed}.json        versioned field record
    fields/p{p}_d{d}_s{seed}.dlog.npz    antilog and trace-by-log sidecar
    fibers/p{p}_a{a}_m{m}_j{j}_n{n}_s{seed}.jsonl

A fiber file starts with a header line (version, key, base-field record,
count); each following line holds one fiber t (little-endian digits) and its
power sum as decimal strings.  Writers take an exclusive flock on a sibling
lock file and publish with an atomic rename; readers take a shared lock.
Entries whose header does not match the current field are ignored.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import logging
import os
from pathlib import Path

import numpy as np

from .fields import Field, FieldError, build_dlog, make_field

log = logging.getLogger(__name__)

CACHE_VERSION = 1
ENV_CACHE_DIR = "SYMKL_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "symkl"


@contextlib.contextmanager
def _locked(path: Path, exclusive: bool):
    lock = path.with_name(path.name + ".lock")
    lock.parent.mkdir(parents=True, exist_ok=True)
    with open(lock, "a") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def _atomic_write(path: Path, write) -> None:
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    try:
        write(tmp)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


class Cache:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def __repr__(self) -> str:
        return f"Cache({str(self.root)!r})"

    # -- fields ------------------------------------------------------------------

    def _field_stem(self, p: int, d: int, seed) -> Path:
        return self.root / "fields" / f"p{p}_d{d}_s{seed}"

    def put_field(self, field: Field) -> None:
        path = self._field_stem(field.p, field.d, field.seed).with_suffix(".json")
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(field.to_record(), sort_keys=True)
        with _locked(path, True):
            _atomic_write(path, lambda tmp: tmp.write_text(text + "\n"))

    def get_field_record(self, p: int, d: int, seed=None) -> dict | None:
        path = self._field_stem(p, d, seed).with_suffix(".json")
        if not path.exists():
            return None
        with _locked(path, False):
            rec = json.loads(path.read_text())
        return rec if rec.get("version") == CACHE_VERSION else None

    def _field_matches(self, field: Field) -> bool:
        rec = self.get_field_record(field.p, field.d, field.seed)
        return rec is not None and rec == field.to_record()

    def ensure_dlog(self, field: Field) -> Field:
        """Load the dlog tables of ``field`` from disk, or build and store them."""
        if field.has_dlog:
            return field
        path = self._field_stem(field.p, field.d, field.seed).with_suffix(".dlog.npz")
        if path.exists() and self._field_matches(field):
            try:
                with _locked(path, False):
                    with np.load(path) as z:
                        antilog, traces = z["antilog"], z["traces"]
                dlog = np.full(field.size, -1, dtype=np.int64)
                dlog[antilog] = np.arange(field.order, dtype=np.int64)
                if antilog.shape == (field.order,) and (dlog[1:] >= 0).all():
                    field._antilog, field._dlog, field._trace_by_log = antilog, dlog, traces
                    self.hits += 1
                    return field
            except (OSError, KeyError, ValueError) as exc:
                log.warning("ignoring unreadable dlog sidecar %s: %s", path, exc)
        self.misses += 1
        build_dlog(field)
        self.put_field(field)
        path.parent.mkdir(parents=True, exist_ok=True)
        with _locked(path, True):
            def write(tmp):
                with open(tmp, "wb") as fh:
                    np.savez(fh, antilog=field.antilog, traces=field.trace_by_log)
            _atomic_write(path, write)
        return field

    # -- fiber sums ----------------------------------------------------------------

    def _fiber_path(self, p, a, m, j, n, seed) -> Path:
        return self.root / "fibers" / f"p{p}_a{a}_m{m}_j{j}_n{n}_s{seed}.jsonl"

    def get_fiber_sums(self, p: int, a: int, m: int, j: int, n: int, seed=None) -> np.ndarray | None:
        """Rows of p_j over the fibers of F_{p^{am}}^* in code order, or None."""
        path = self._fiber_path(p, a, m, j, n, seed)
        if not path.exists():
            self.misses += 1
            return None
        base = make_field(p, a * m, seed=seed)
        try:
            with _locked(path, False):
                lines = path.read_text().splitlines()
            head = json.loads(lines[0])
            key = {"p": p, "a": a, "m": m, "j": j, "n": n, "seed": seed}
            if (head.get("version") != CACHE_VERSION or head.get("key") != key
                    or head.get("field") != base.to_record() or head.get("count") != base.order
                    or len(lines) != base.order + 1):
                raise ValueError("header mismatch")
            rows = []
            for code, line in enumerate(lines[1:], start=1):
                rec = json.loads(line)
                if base(rec["t"]).code != code:
                    raise ValueError(f"fiber out of order at line {code}")
                rows.append([int(x) for x in rec["sum"]])
            arr = np.array(rows, dtype=object)
            if max((abs(int(v)) for v in arr.flat), default=0) < 2**62:
                arr = arr.astype(np.int64)
        except (ValueError, KeyError, IndexError, json.JSONDecodeError, FieldError) as exc:
            log.warning("ignoring stale cache entry %s: %s", path, exc)
            self.misses += 1
            return None
        self.hits += 1
        return arr

    def put_fiber_sums(self, p: int, a: int, m: int, j: int, n: int, seed, rows: np.ndarray) -> None:
        base = make_field(p, a * m, seed=seed)
        rows = np.asarray(rows)
        if rows.shape[0] != base.order:
            raise ValueError(f"expected {base.order} fibers, got {rows.shape[0]}")
        path = self._fiber_path(p, a, m, j, n, seed)
        path.parent.mkdir(parents=True, exist_ok=True)
        head = {"version": CACHE_VERSION, "key": {"p": p, "a": a, "m": m, "j": j, "n": n, "seed": seed},
                "field": base.to_record(), "count": base.order}
        out = [json.dumps(head, sort_keys=True)]
        for code, row in enumerate(rows, start=1):
            t = list(base.from_code(code).coeffs)
            out.append(json.dumps({"t": t, "sum": [str(int(x)) for x in row]}))
        text = "\n".join(out) + "\n"
        with _locked(path, True):
            _atomic_write(path, lambda tmp: tmp.write_text(text))

    def clear(self) -> None:
        for sub in ("fibers", "fields"):
            d = self.root / sub
            if d.exists():
                for f in d.iterdir():
                    f.unlink()
