"""Audit every bundled witness scenario and print one row per instance.

Usage: python3 scripts/audit_bundled.py [--beta BETA]
"""

import argparse

from qbattery.audit import ScenarioSpec, bundled_witnesses, eigenstate_audit


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--beta", type=float, default=1.0)
    args = parser.parse_args()

    header = f"{'witness':32s} {'verdict':20s} {'Theta(row)':>12s} {'Theta(col)':>12s} {'power':>10s} cond"
    print(header)
    print("-" * len(header))
    for name, model, k0 in bundled_witnesses():
        report = eigenstate_audit(ScenarioSpec(model=model, beta=args.beta, k0=k0))
        t_row = max(report.theta_values) if report.theta_values else 0.0
        t_col = max(report.theta_transposed) if report.theta_transposed else 0.0
        print(f"{name:32s} {report.verdict:20s} {t_row:12.4e} {t_col:12.4e} "
              f"{report.power:10.4f} {report.condition_holds}")

    print()
    print("claim status over the bundle alone:")
    counts = {}
    for name, model, k0 in bundled_witnesses():
        report = eigenstate_audit(ScenarioSpec(model=model, beta=args.beta, k0=k0))
        for claim in report.claims:
            counts.setdefault(claim.claim_id, []).append((name, claim.status))
    for claim_id, rows in counts.items():
        bad = [name for name, status in rows if status == "violated"]
        verdict = f"violated by {', '.join(bad)}" if bad else "no counterexample here"
        print(f"  {claim_id:16s} {verdict}")


if __name__ == "__main__":
    main()
