"""The sample-only interactive proof for weight languages, honest and
cheating runs, plus the three-interval fixture that separates testers from
interactive verifiers.

Run:  python3 demos/weight_protocol.py
"""

from fractions import Fraction

from dfipp import Pmf
from dfipp.protocols import HonestHamProver, run_ham_ipp
from dfipp.experiments import gen_ham_lb_fixture

x = (1, 0, 1, 0, 0, 1, 0, 0)
n, w = len(x), sum(x)
U = Pmf.uniform(n)
eps = Fraction(1, 4)

print("== honest runs use only labeled samples (never a query) ==")
res = run_ham_ipp(x, U, w, eps, HonestHamProver(x), seed=1)
print(f"verdict: {res.verdict.accepted}, samples: {res.ledger.samples}, "
      f"queries: {res.ledger.queries}, comm bits: {res.ledger.comm_bits}")

print()
print("== a prover committed to the wrong string gets caught at the leaves ==")
alt = (1, 1, 1, 0, 0, 0, 0, 0)  # same weight, different support
rejects = 0
trials = 200
for seed in range(trials):
    r = run_ham_ipp((0,) * n, U, 3, eps, HonestHamProver(alt), seed)
    rejects += not r.verdict.accepted
print(f"reject rate against the committed adversary: {rejects}/{trials}")

print()
print("== the lower-bound fixture: a NO pair indistinguishable from a YES pair ==")
fx = gen_ham_lb_fixture(4096, Fraction(1, 100), e3=Fraction(2, 3) - Fraction(1, 10))
rep = fx["report"]
print("intervals:", rep["intervals"])
print("P_{D1}[X_i = 1] =", rep["p1_x"], "= P_{D2}[Y_i = 1] =", rep["p2_y"],
      "(target 1 - 12 eps =", str(rep["identity_target"]) + ")")
print("exact distance of the NO instance from the weight language:",
      rep["distance_d1"], "> eps:", rep["far"])
print()
print("...yet the interactive verifier still rejects the NO instance:")
rejects = 0
for seed in range(20):
    r = run_ham_ipp(fx["x"], fx["d1"], fx["w"], Fraction(1, 100),
                    HonestHamProver(fx["y"]), seed)
    rejects += not r.verdict.accepted
print(f"rejects (prover committed to the YES string): {rejects}/20")
