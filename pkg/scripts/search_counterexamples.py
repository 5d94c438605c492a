"""Run the claim falsifier over a random ensemble and print what broke.

Usage: python3 scripts/search_counterexamples.py [--seed S] [--trials N]
           [--dim-max D] [--no-bundled]
"""

import argparse

from qbattery.audit import EnsembleSpec, claim_falsifier


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--dim-max", type=int, default=6)
    parser.add_argument("--no-bundled", action="store_true")
    args = parser.parse_args()

    spec = EnsembleSpec(seed=args.seed, trials=args.trials, dim_max=args.dim_max,
                        include_bundled=not args.no_bundled)
    report = claim_falsifier(spec)

    print(f"seed {report.seed}, {report.trials} random instances, "
          f"dims {report.dim_min}..{report.dim_max}, bundled={report.include_bundled}")
    print()
    for claim in report.claims:
        c = claim.counts
        line = (f"{claim.claim_id:16s} {claim.status:13s} "
                f"support {c['supporting']:4d}  vacuous {c['vacuous']:4d}  "
                f"counter {c['counterexamples']:4d}  unclear {c['inconclusive']:4d}")
        if claim.witness is not None:
            line += f"  <- {claim.witness['label']}"
        print(line)

    if report.counterexamples:
        print(f"\n{len(report.counterexamples)} distinct counterexample instances:")
        for record in report.counterexamples:
            print(f"  {record['label']:36s} dim {record['dim']}  "
                  f"breaks {', '.join(record['violates'])}")
    else:
        print("\nno counterexamples in this ensemble")


if __name__ == "__main__":
    main()
