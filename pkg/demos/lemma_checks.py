"""Run every desk-scale lemma check once at modest trial counts and print
the reports.  The acceptance suite runs the same checks at their mandated
sizes; the CLI exposes them as `dfipp check-lemma <id>`.

Run:  python3 demos/lemma_checks.py
"""

from dfipp.experiments import LEMMA_CHECKS, cmd_check_lemma

TRIALS = {
    "epsilons": 100,
    "dpl_product": 50,
    "linSub": 100,
    "grainer-claim": 1000,
    "grainer-distance": 300,
    "fold_dispersed": 500,
    "tvineq": 500,
    "rr20_min_dist": 100,
    "appendix-a": 200,
}

for lemma in LEMMA_CHECKS:
    report = cmd_check_lemma(lemma, TRIALS[lemma], seed=0)
    status = report.pop("status")
    detail = {k: v for k, v in report.items()
              if k in ("checked", "vacuous", "violations", "frequency", "bound",
                       "t", "instances", "failures", "draws")}
    print(f"{status.upper():5s} {lemma:18s} {detail}")
