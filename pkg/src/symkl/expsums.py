"""Hyper-Kloosterman fiber sums

    T(t; Q) = sum_{x in (F_Q^*)^n} zeta_p^{Tr(x_1 + ... + x_n + t / (x_1 ... x_n))}

computed either by direct enumeration or, for every unit t at once, as the
(n+1)-fold multiplicative convolution of x -> zeta_p^{Tr(x)} on F_Q^*.
Sums are returned as integer coordinate rows in the power basis of Z[zeta_p].
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np

from .cyclotomic import CycInt
from .fields import Field, FieldElem, FieldError, build_dlog, embed, make_field

log = logging.getLogger(__name__)

DEFAULT_WORK_CAP = 2**30
EXACT_CONV_BUDGET = 2**28
FFT_ROUNDING_SLACK = 0.125

Method = Literal["auto", "naive", "exact", "fft"]


class WorkCapExceeded(RuntimeError):
    pass


def work_cap() -> int:
    return int(os.environ.get("SYMKL_WORK_CAP", DEFAULT_WORK_CAP))


def _width(p: int) -> int:
    return max(p - 1, 1)


def _counts_to_coords(counts: np.ndarray, p: int) -> np.ndarray:
    """Rows of residue counts (length p) -> power-basis coordinates."""
    if p == 2:
        return (counts[..., 0] - counts[..., 1])[..., None]
    return counts[..., : p - 1] - counts[..., p - 1 : p]


def rows_to_cycints(rows: np.ndarray, p: int) -> list[CycInt]:
    return [CycInt(p, tuple(int(c) for c in row)) for row in np.asarray(rows)]


# -- direct enumeration -------------------------------------------------------

def fiber_sum_naive(Q: Field, t: FieldElem, n: int, twist: FieldElem | None = None,
                    cap: int | None = None, chunk: int = 1 << 20) -> CycInt:
    """Direct enumeration of T(t; Q) over all (Q-1)^n points.

    Products and inverses go through the log tables; the sum
    x_1 + ... + x_n + t/(x_1...x_n) is formed as a field element and its
    absolute trace taken afterwards.
    """
    if t.field is not Q:
        raise FieldError("t must be an element of Q")
    if t.is_zero():
        raise ValueError("fiber parameter t must be a unit")
    if n < 1:
        raise ValueError("n must be positive")
    cap = work_cap() if cap is None else cap
    L = Q.order
    total = L**n
    if total > cap:
        raise WorkCapExceeded(f"naive sum needs {total} terms, cap is {cap}")
    build_dlog(Q)
    p = Q.p
    lt = Q.log_of(t)
    counts = np.zeros(p, dtype=np.int64)
    antilog = Q.antilog
    tvec = Q.trace_vector
    cdig = None if twist is None else np.array(twist.coeffs, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.zeros((len(idx), Q.d), dtype=np.int64)
        logsum = np.zeros(len(idx), dtype=np.int64)
        rest = idx
        for _ in range(n):
            rest, i = np.divmod(rest, L)
            digits += Q.codes_to_digits(antilog[i])
            logsum += i
        digits += Q.codes_to_digits(antilog[(lt - logsum) % L])
        digits %= p
        if cdig is not None:
            codes = Q.digits_to_codes(digits)
            nz = codes != 0
            prod = np.zeros_like(codes)
            prod[nz] = antilog[(Q.dlog[codes[nz]] + Q.log_of(twist)) % L]
            digits = Q.codes_to_digits(prod)
        tr = (digits @ tvec) % p
        counts += np.bincount(tr, minlength=p)
    return CycInt.from_redundant(p, counts)


NAIVE_BATCH = 1 << 22


def naive_rows(Q: Field, t_codes: np.ndarray, n: int, twist: FieldElem | None = None,
               cap: int | None = None) -> np.ndarray:
    """Direct enumeration of T(t; Q) for several fibers at once.

    The point set (F_Q^*)^n is enumerated once; for each t the exponent is the
    trace functional applied to the digits of x_1 + ... + x_n plus that of
    t / (x_1 ... x_n).  Falls back to one :func:`fiber_sum_naive` call per
    fiber when the point set is large.
    """
    t_codes = np.asarray(t_codes, dtype=np.int64)
    out = np.zeros((len(t_codes), _width(Q.p)), dtype=np.int64)
    L = Q.order
    M = L**n
    cap = work_cap() if cap is None else cap
    if len(t_codes) * M > cap:
        raise WorkCapExceeded(f"naive rows need {len(t_codes) * M} terms, cap is {cap}")
    if M > NAIVE_BATCH:
        for k, code in enumerate(t_codes):
            out[k] = fiber_sum_naive(Q, Q.from_code(int(code)), n, twist=twist, cap=cap).coeffs
        return out
    build_dlog(Q)
    p = Q.p
    functional = Q.trace_vector
    if twist is not None:
        functional = (Q.mul_matrix(twist) @ functional) % p
    # trace functional of every nonzero element, indexed by log
    tr_log = (Q.codes_to_digits(Q.antilog) @ functional) % p
    idx = np.arange(M, dtype=np.int64)
    digits = np.zeros((M, Q.d), dtype=np.int64)
    logsum = np.zeros(M, dtype=np.int64)
    for _ in range(n):
        idx, i = np.divmod(idx, L)
        digits += Q.codes_to_digits(Q.antilog[i])
        logsum += i
    tr_sum = (digits @ functional) % p
    del digits, idx
    if (t_codes == 0).any():
        raise ValueError("fiber parameter t must be a unit")
    lt = Q.dlog[t_codes]
    B = max(1, NAIVE_BATCH // M)
    for start in range(0, len(lt), B):
        chunk = lt[start : start + B]
        tr = (tr_sum[None, :] + tr_log[(chunk[:, None] - logsum[None, :]) % L]) % p
        flat = tr + p * np.arange(len(chunk), dtype=np.int64)[:, None]
        counts = np.bincount(flat.ravel(), minlength=p * len(chunk)).reshape(len(chunk), p)
        out[start : start + len(chunk)] = _counts_to_coords(counts, p)
    return out


# -- convolution --------------------------------------------------------------

def _trace_sequence(Q: Field, twist: FieldElem | None) -> np.ndarray:
    tau = Q.trace_by_log
    if twist is not None:
        tau = np.roll(tau, -Q.log_of(twist))
    return tau


def _exact_convolution(Q: Field, n: int, tau: np.ndarray) -> np.ndarray:
    """Integer residue counts N[s, c] = #{x : prod x = g^s, trace exponent = c}."""
    p, L = Q.p, Q.order
    classes = [(tau == c).astype(np.int64) for c in range(p)]
    counts = np.stack(classes, axis=1)
    for _ in range(n):
        new = np.zeros_like(counts)
        for c1 in range(p):
            a = counts[:, c1]
            if not a.any():
                continue
            for c2 in range(p):
                b = classes[c2]
                if not b.any():
                    continue
                full = np.convolve(a, b)
                folded = full[:L].copy()
                folded[: len(full) - L] += full[L:]
                new[:, (c1 + c2) % p] += folded
        counts = new
    return counts


def _fft_convolution(Q: Field, n: int, tau: np.ndarray) -> np.ndarray:
    """Power-basis coordinates of T(g^s) for all s from one complex embedding.

    Uses sigma_c(T(t)) = T(c^{n+1} t) to obtain every embedding from the single
    convolution, then inverts the embedding map and rounds.  Raises if any
    coordinate is not within FFT_ROUNDING_SLACK of an integer.
    """
    p, L = Q.p, Q.order
    if L * p > 2**27:
        raise WorkCapExceeded(f"FFT table of {L} x {p} entries is too large")
    f = np.exp(2j * np.pi * tau.astype(np.float64) / p)
    spectrum = np.fft.fft(f)
    S = np.fft.ifft(spectrum ** (n + 1))
    del spectrum, f
    if p == 2:
        approx = S.real[:, None]
        imag_err = np.abs(S.imag).max(initial=0.0)
    else:
        s = np.arange(L)
        shifts = [(n + 1) * int(Q.dlog[c]) for c in range(1, p)]
        Z = np.stack([S[(s + sh) % L] for sh in shifts], axis=1)
        omega = np.exp(2j * np.pi * np.arange(1, p) / p)
        B0 = -(Z @ omega)
        B = np.concatenate([B0[:, None], Z], axis=1)
        coords = np.fft.fft(B, axis=1) / p
        approx = coords[:, : p - 1].real
        imag_err = np.abs(coords[:, : p - 1].imag).max(initial=0.0)
    rounded = np.rint(approx)
    err = max(float(np.abs(approx - rounded).max(initial=0.0)), float(imag_err))
    if err > FFT_ROUNDING_SLACK:
        raise ArithmeticError(f"FFT convolution for {Q!r}, n={n} not safely rounded (gap {err:.3g})")
    log.debug("fft convolution %r n=%d rounding gap %.3g", Q, n, err)
    return rounded.astype(np.int64)


def exact_cost(Q: Field, n: int) -> int:
    return Q.p * Q.p * Q.order * Q.order * n


def all_fibers_convolution(Q: Field, n: int, method: Method = "auto",
                           twist: FieldElem | None = None) -> np.ndarray:
    """Coordinates of T(g^s; Q) for every s in [0, Q-1), row s.

    ``method`` is "exact" (integer schoolbook cyclic convolution), "fft"
    (complex FFT with a rounding certificate) or "auto".
    """
    if not Q.has_dlog:
        raise FieldError(f"{Q!r}: convolution needs the discrete-log table")
    tau = _trace_sequence(Q, twist)
    if method == "auto":
        method = "exact" if exact_cost(Q, n) <= EXACT_CONV_BUDGET else "fft"
    if method == "exact":
        return _counts_to_coords(_exact_convolution(Q, n, tau), Q.p)
    if method == "fft":
        return _fft_convolution(Q, n, tau)
    raise ValueError(f"unknown convolution method {method!r}")


def convolution_cost(Q: Field, n: int) -> int:
    """Work estimate of one all-fiber convolution on the route "auto" would take."""
    L = Q.order
    if exact_cost(Q, n) <= EXACT_CONV_BUDGET:
        return L * L * (n + 1)
    return (n + 1) * L * max(1, L.bit_length()) * Q.p


def choose_method(n_fibers: int, Q: Field, n: int) -> str:
    """Per-fiber enumeration when it is cheaper than one all-fiber convolution."""
    naive = n_fibers * Q.order**n
    if naive <= convolution_cost(Q, n) and naive <= work_cap():
        return "naive"
    return "convolution"


def fiber_rows(Q: Field, t_codes: np.ndarray, n: int, method: str | None = None,
               twist: FieldElem | None = None) -> np.ndarray:
    """T(t; Q) rows for the given unit codes of Q."""
    build_dlog(Q)
    t_codes = np.asarray(t_codes, dtype=np.int64)
    if method in (None, "auto"):
        method = choose_method(len(t_codes), Q, n)
    if method == "naive":
        return naive_rows(Q, t_codes, n, twist=twist)
    conv_method = method if method in ("exact", "fft") else "auto"
    table = all_fibers_convolution(Q, n, method=conv_method, twist=twist)
    return table[Q.dlog[t_codes]]


# -- batches over a subfield --------------------------------------------------

@dataclass
class FiberSumTable:
    """p_j(t) = (-1)^n T(t; q^{jm}) for every unit t of F_{q^m}, j <= j_max."""

    q: int
    m: int
    j_max: int
    n: int
    field: Field
    codes: np.ndarray
    sums: np.ndarray  # shape (#fibers, j_max, width)
    methods: list[str] = dc_field(default_factory=list)

    @property
    def p(self) -> int:
        return self.field.p

    def __len__(self) -> int:
        return len(self.codes)

    def index_of(self, t: FieldElem) -> int:
        return int(t.code) - 1

    def __getitem__(self, t: FieldElem) -> list[CycInt]:
        row = self.sums[self.index_of(t)]
        return rows_to_cycints(row, self.p)

    def items(self):
        for k, code in enumerate(self.codes):
            yield self.field.from_code(int(code)), rows_to_cycints(self.sums[k], self.p)


def batch_power_sums(q_field: Field, m: int, j_max: int, n: int, method: str | None = None,
                     twist: FieldElem | None = None, cache=None) -> FiberSumTable:
    """Power sums of the m-th Frobenius eigenvalues at every fiber of F_{q^m}^*.

    ``q_field`` is F_q = F_{p^a}.  Fiber t of F_{q^m} is embedded into
    F_{q^{jm}} and p_j(t) = (-1)^n T(t; q^{jm}).  An optional twist
    c in F_q replaces the character by x -> zeta^{Tr(c x)}.
    """
    p, a = q_field.p, q_field.d
    base = make_field(p, a * m, seed=q_field.seed)
    codes = np.arange(1, base.size, dtype=np.int64)
    sums = np.zeros((len(codes), j_max, _width(p)), dtype=np.int64)
    methods = []
    sign = -1 if n % 2 else 1
    for j in range(1, j_max + 1):
        cached = None
        if cache is not None and twist is None:
            cached = cache.get_fiber_sums(p, a, m, j, n, q_field.seed)
        if cached is not None:
            sums[:, j - 1] = cached
            methods.append("cache")
            continue
        big = make_field(p, a * m * j, seed=q_field.seed)
        if cache is not None:
            cache.ensure_dlog(big)
        else:
            build_dlog(big)
        emb = embed(base, big)
        big_codes = emb.map_codes(codes)
        tw = None if twist is None else embed(q_field, big)(twist)
        chosen = method or choose_method(len(codes), big, n)
        rows = fiber_rows(big, big_codes, n, method=chosen, twist=tw)
        sums[:, j - 1] = sign * rows
        methods.append(chosen)
        if cache is not None and twist is None:
            cache.put_fiber_sums(p, a, m, j, n, q_field.seed, sums[:, j - 1])
    return FiberSumTable(q_field.size, m, j_max, n, base, codes, sums, methods)
