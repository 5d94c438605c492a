"""Probe how the regularized-eigenstate power diverges as epsilon -> 0.

The energy rate converges to the projector value while the entropy rate grows
like -ln(eps), so the free-energy power has no eps -> 0 limit.  This script
prints the sweep table for a pumped qubit and the fitted log slope.

Usage: python3 scripts/entropy_rate_probe.py [--decades N] [--beta BETA]
"""

import argparse

import numpy as np

from qbattery.audit import ScenarioSpec, epsilon_sweep
from qbattery.dynamics import JumpChannel, LindbladModel
from qbattery.linalg import HermitianMatrix


def pump_model():
    h = HermitianMatrix(np.diag([0.0, 1.0]))
    raising = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    return LindbladModel(h, (JumpChannel(1.0, raising),))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--decades", type=int, default=8,
                        help="sweep eps = 1e-2 .. 1e-(decades+1)")
    parser.add_argument("--beta", type=float, default=1.0)
    args = parser.parse_args()

    eps = tuple(10.0 ** (-k) for k in range(2, args.decades + 2))
    spec = ScenarioSpec(model=pump_model(), beta=args.beta, k0=0, epsilon_list=eps)
    report = epsilon_sweep(spec)

    print(f"projector energy rate: {report.power_reference:.15g}")
    print(f"{'eps':>10s} {'energy_rate':>18s} {'entropy_rate':>14s} {'power':>14s}")
    for row in report.rows:
        print(f"{row.epsilon:10.1e} {row.energy_rate:18.12f} "
              f"{row.entropy_rate:14.6f} {row.power_analytic:14.6f}")

    print(f"\nentropy_rate ~ a*ln(eps) + b with a = {report.fit_slope:.6f}, "
          f"b = {report.fit_intercept:.6f}")
    print("energy converges, entropy diverges: the power has no limit")


if __name__ == "__main__":
    main()
