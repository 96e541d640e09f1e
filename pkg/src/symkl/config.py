"""Run configuration shared by the command-line front end and the verifier."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

from . import __version__, polyfp
from .cyclotomic import DEFAULT_PRECISION
from .expsums import DEFAULT_WORK_CAP
from .fields import DEFAULT_SIZE_CAP
from .linops import LinOp

SCHEMA_VERSION = 1
OUTPUT_FORMATS = ("json", "csv")
METHODS = (None, "auto", "naive", "convolution", "exact", "fft")
ROUTES = ("auto", "direct", "newton", "dual")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int = 2
    a: int = 1
    n: int = 1
    op: str = "sym:1"
    field_cap: int = field(default_factory=lambda: int(os.environ.get("SYMKL_FIELD_CAP", DEFAULT_SIZE_CAP)))
    work_cap: int = field(default_factory=lambda: int(os.environ.get("SYMKL_WORK_CAP", DEFAULT_WORK_CAP)))
    cache_dir: str | None = field(default_factory=lambda: os.environ.get("SYMKL_CACHE_DIR"))
    out: str = "json"
    seed: int | None = None
    precision: int = DEFAULT_PRECISION
    max_degree: int | None = None
    t: tuple[int, ...] = (1,)
    method: str | None = None
    route: str = "auto"
    svg: str | None = None

    @property
    def q(self) -> int:
        return self.p**self.a

    @property
    def linop(self) -> LinOp:
        return LinOp.parse(self.op)

    def validate(self) -> RunConfig:
        if not polyfp.is_prime(self.p):
            raise ConfigError(f"p = {self.p} is not prime")
        if self.a < 1 or self.n < 1:
            raise ConfigError("a and n must be positive")
        try:
            self.linop.check_dimension(self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.out not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}")
        if self.q > self.field_cap:
            raise ConfigError(f"q = {self.q} exceeds the field cap {self.field_cap}")
        if self.precision < 53:
            raise ConfigError("precision must be at least 53 bits")
        if self.max_degree is not None and self.max_degree < 1:
            raise ConfigError("max degree must be positive")
        if self.route not in ROUTES:
            raise ConfigError(f"unknown route {self.route!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if any(not 0 <= c < self.p for c in self.t):
            raise ConfigError("t digits must lie in [0, p)")
        return self

    def apply_caps(self) -> None:
        """Export caps so that the field and work budgets see them."""
        os.environ["SYMKL_FIELD_CAP"] = str(self.field_cap)
        os.environ["SYMKL_WORK_CAP"] = str(self.work_cap)

    def to_json(self) -> dict:
        d = asdict(self)
        d["t"] = list(self.t)
        return {"schema": SCHEMA_VERSION, "version": __version__, **d}
