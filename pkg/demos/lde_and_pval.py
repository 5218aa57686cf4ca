"""Walk through the algebra layer: tensors, low-degree extensions, the
polynomial-evaluation language, and the exact distance oracles.

Run:  python3 demos/lde_and_pval.py
"""

import random
from fractions import Fraction

from dfipp import (InputTensor, PrimeField, Pmf, PvalInstance, dist,
                   dist_to_pval_bruteforce, hybrid_dist, lde_eval, pval_member,
                   pval_min_distance)

rng = random.Random(0)
F7 = PrimeField(7)

print("== a 2x2 tensor over F_7 and its low-degree extension ==")
X = InputTensor(F7, 2, 2, (1, 4, 2, 6))
print("cells:", X.data)
print("P_X agrees with X on the embedded grid [2]^2:")
for cell in [(0, 0), (0, 1), (1, 0), (1, 1)]:
    print(f"  P_X{cell} = {lde_eval(X, cell)}  (cell value {X.cell(cell)})")
print("and extends off the grid, e.g. P_X(3, 5) =", lde_eval(X, (3, 5)))

print()
print("== PVAL: constrain the extension on a point multiset ==")
points = ((3, 5), (2, 2))
values = tuple(lde_eval(X, p) for p in points)
inst = PvalInstance(F7, 2, 2, points, values)
print("X is a member of PVAL(J, P_X(J)):", pval_member(X, inst))
wrong = PvalInstance(F7, 2, 2, points, tuple((v + 1) % 7 for v in values))
print("...and not of a shifted claim:   ", pval_member(X, wrong))

print()
print("== exact distances under arbitrary distributions ==")
U = Pmf.uniform(4, shape=(2, 2))
skew = Pmf([Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)],
           shape=(2, 2))
Y = InputTensor(F7, 2, 2, (1, 4, 2, 0))  # one disagreement, in the last cell
print("d_U(X, Y)    =", dist(X.data, Y.data, U))
print("d_skew(X, Y) =", dist(X.data, Y.data, skew))
print("hybrid max   =", hybrid_dist(X.data, Y.data, skew, U))

print()
print("== brute-force distance to a PVAL language (the desk-scale oracle) ==")
F5 = PrimeField(5)
W = InputTensor.random(F5, 2, 2, rng)
far_inst = PvalInstance(F5, 2, 2, ((1, 3),), ((lde_eval(W, (1, 3)) + 2) % 5,))
U5 = Pmf.uniform(4, shape=(2, 2))
print("scanning all 5^4 = 625 candidates...")
print("d_U(W, PVAL) =", dist_to_pval_bruteforce(W, far_inst, U5))
print("min distance of the code itself:", pval_min_distance(far_inst))
