"""Salvage-fraction crossovers of SWH-UBA as the uncle fraction varies.

Prints one line per kappa with the three crossover values and the largest
distance from the reference targets.
"""

import argparse

import numpy as np

from poolgame.analytic import Strategy
from poolgame.core import SystemParams
from poolgame.lab import CrossoverCase, kappa_disclosure_sweep

CASES = (
    CrossoverCase(Strategy.HONEST, 0.1, 0.153),
    CrossoverCase(Strategy.UBA, 0.1, 0.201),
    CrossoverCase(Strategy.UBA, 0.24, 0.304),
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappas", default="0:0.99:0.05", help="S:E:STEP")
    ap.add_argument("--c", type=float, default=0.0)
    ap.add_argument("--tol", type=float, default=1e-3)
    args = ap.parse_args()
    s, e, step = (float(x) for x in args.kappas.split(":"))
    kappas = np.round(np.arange(s, e + 1e-9, step), 6)
    print("kappa," + ",".join(f"{c.rival.value}@{c.alpha:g}" for c in CASES) + ",max_abs_error")
    for row in kappa_disclosure_sweep(CASES, kappas, sys=SystemParams(c=args.c), tol=args.tol):
        vals = ",".join("" if v is None else f"{v:.4f}" for v in row["crossovers"])
        print(f"{row['kappa']:g},{vals},{row['max_abs_error']:.4f}")


if __name__ == "__main__":
    main()
