"""From one fiber to the L-function of a symmetric power family.

Run: python3 demos/01_lfunction_tour.py
"""

from __future__ import annotations

from symkl.fiber import fiber_checks, fiber_polynomial
from symkl.fields import make_field
from symkl.lfunction import assemble
from symkl.linops import LinOp, d_k, r_poly
from symkl.polygons import hodge_numbers, hodge_polygon, lies_on_or_above, newton_polygon

# A single fiber: the local factor of the Kloosterman sheaf at t = 1 over F_2.
F2 = make_field(2, 1)
f = fiber_polynomial(F2, F2.one, 1)
rep = fiber_checks(f)
print("fiber at t=1 over F_2:", f.integer_coeffs())
print("  slopes", [str(s) for s in rep.slopes], "root moduli", [round(m, 12) for m in rep.moduli])

# The family L-function for a few (n, k, p), with Newton and Hodge polygons side by side.
for n, k, p in [(1, 3, 2), (1, 5, 2), (1, 3, 5), (2, 2, 3), (2, 2, 2)]:
    A = assemble(make_field(p, 1), n, LinOp.sym(k))
    print(f"\n(n, k, p) = ({n}, {k}, {p})   d_k = {d_k(n, k, p)}")
    print("  L     =", A.L)
    print("  P     =", A.P)
    print("  L / P =", A.M, "  stable:", A.stable)
    if A.L.is_polynomial:
        hd = hodge_numbers(r_poly(LinOp.sym(k), n).coeffs, n)
        NP, HP = newton_polygon(A.L.num, p), hodge_polygon(hd)
        cmp = lies_on_or_above(NP, HP)
        print("  Newton", NP.to_json(), " Hodge", HP.to_json(), " NP >= HP:", cmp.verdict)
