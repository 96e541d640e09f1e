"""Obstruction counts d_k and the reduced cohomology they control.

Run: python3 demos/02_obstructions_and_cohomology.py
"""

from __future__ import annotations

from symkl.linops import LinOp, d_obstruction, scan_prime_power
from symkl.redcoh import coker_dimensions, constant_basis, injectivity_report

# d_k counts exponent vectors of Sym^k that collapse modulo p; nonzero values flag bad primes.
for n, k in [(1, 3), (2, 2), (3, 2), (5, 5)]:
    print(f"Sym^{k}, n = {n}: primes p <= 30 with d_k != 0 ->", scan_prime_power(n, k, 30))

ob = d_obstruction(LinOp.sym(3), 1, 3)
print("\nd_3(1, 3) =", ob.count, "witnesses", ob.witnesses)

# When d_k = 0 the connection map is injective and the cokernel has the Hodge-number dimensions.
for n, k, p in [(1, 3, 2), (1, 3, 3), (1, 5, 2), (2, 2, 3)]:
    rep = injectivity_report(n, k, p)
    dims = coker_dimensions(n, k, p)
    while dims and dims[-1] == 0:
        dims.pop()
    print(f"\n(n, k, p) = ({n}, {k}, {p}) injective: {rep.injective}")
    if rep.injective:
        print("  graded dimensions", dims, " constant basis", constant_basis(n, k, p))
