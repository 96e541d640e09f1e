"""Independent routes to the same numbers.

The all-fiber convolution is compared with direct enumeration, and the
L-function built from rational-point traces is compared with the Euler
product over closed points.

Run: python3 demos/03_oracles.py
"""

from __future__ import annotations

import time

import numpy as np

from symkl.expsums import all_fibers_convolution, naive_rows
from symkl.fields import build_dlog, make_field
from symkl.lfunction import closed_point_series, exp_series, log_coefficients
from symkl.linops import LinOp

for p, a, n in [(2, 3, 1), (5, 2, 1), (3, 2, 2), (7, 1, 3)]:
    Q = build_dlog(make_field(p, a))
    codes = np.arange(1, Q.size, dtype=np.int64)
    t0 = time.perf_counter()
    conv = all_fibers_convolution(Q, n)[Q.dlog[codes]]
    t1 = time.perf_counter()
    naive = naive_rows(Q, codes, n)
    t2 = time.perf_counter()
    print(f"F_{Q.size}, n = {n}: equal = {np.array_equal(conv, naive)}  "
          f"(convolution {t1 - t0:.3f}s, enumeration {t2 - t1:.3f}s)")

for p, a, n, k in [(2, 1, 1, 3), (3, 1, 1, 2), (2, 2, 1, 3), (2, 1, 3, 1)]:
    F, op = make_field(p, a), LinOp.sym(k)
    traces = exp_series(log_coefficients(F, n, op, 4).c)
    product = closed_point_series(F, n, op, 4)
    print(f"q = {F.size}, n = {n}, Sym^{k}: series {list(traces.coeffs)}  closed points agree: {traces == product}")
