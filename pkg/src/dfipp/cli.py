"""Command line entry point: run, check-lemma, gen-fixture, replay.

Exit codes: 0 pass, 1 statistical-bound failure, 2 exact-invariant
violation, 3 budget refusal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .experiments import (EXIT_EXACT_FAIL, EXIT_PASS, EXIT_REFUSED, cmd_check_lemma,
                          cmd_replay, cmd_run, exit_code_for, gen_ham_lb_fixture)
from .tensors import BudgetExceeded

DEFAULT_BUDGET = int(os.environ.get("DFIPP_BUDGET", 10 ** 7))


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dfipp",
                                     description="protocol simulator and lemma checker")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a protocol experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the experiment JSON")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--trials", type=int, help="override the config trial count")
    p_run.add_argument("--out", help="output prefix for .csv/.json reports")

    p_lem = sub.add_parser("check-lemma", help="run a lemma-check suite")
    p_lem.add_argument("lemma")
    p_lem.add_argument("--trials", type=int, default=200)
    p_lem.add_argument("--seed", type=int, default=0)
    p_lem.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p_fix = sub.add_parser("gen-fixture", help="generate the weight-testing fixture pair")
    p_fix.add_argument("--n", type=int, required=True)
    p_fix.add_argument("--eps", default="1/100")
    p_fix.add_argument("--e2", default="2/3", help="exponent of |I2|")
    p_fix.add_argument("--e3", default="1997/3000", help="exponent of |I3|")
    p_fix.add_argument("--out", help="write the fixture JSON here")

    p_rep = sub.add_parser("replay", help="re-verify a recorded transcript")
    p_rep.add_argument("transcript")

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            with open(args.config) as fh:
                config = json.load(fh)
            if args.seed is not None:
                config["seed"] = args.seed
            if args.trials is not None:
                config["trials"] = args.trials
            record = cmd_run(config, out_prefix=args.out)
            print(json.dumps(_jsonable(record), sort_keys=True, indent=2))
            return EXIT_PASS

        if args.command == "check-lemma":
            report = cmd_check_lemma(args.lemma, args.trials, args.seed,
                                     budget=args.budget)
            print(json.dumps(_jsonable(report), sort_keys=True, indent=2))
            return exit_code_for(report)

        if args.command == "gen-fixture":
            fixture = gen_ham_lb_fixture(args.n, Fraction(args.eps),
                                         Fraction(args.e2), Fraction(args.e3))
            payload = {
                "n": args.n,
                "w": fixture["w"],
                "x": list(fixture["x"]),
                "y": list(fixture["y"]),
                "d1_masses": [str(v) for v in fixture["d1"].masses],
                "d2_masses": [str(v) for v in fixture["d2"].masses],
                "report": _jsonable(fixture["report"]),
            }
            if args.out:
                with open(args.out, "w") as fh:
                    json.dump(payload, fh, sort_keys=True, indent=2)
                    fh.write("\n")
            print(json.dumps(_jsonable(fixture["report"]), sort_keys=True, indent=2))
            return EXIT_PASS if fixture["report"]["identity_holds"] else EXIT_EXACT_FAIL

        if args.command == "replay":
            report = cmd_replay(args.transcript)
            print(json.dumps(_jsonable(report), sort_keys=True, indent=2))
            return EXIT_PASS if report["match"] else EXIT_EXACT_FAIL
    except BudgetExceeded as exc:
        print(json.dumps({"status": "refused", "reason": str(exc)}), file=sys.stderr)
        return EXIT_REFUSED
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
