"""Write the data and summary of every canned figure to CSV files.

    python scripts/reproduce_figures.py --out results/ --workers 4
"""

import argparse
from pathlib import Path

from poolgame.cli import main
from poolgame.sweeps import FIGURES


def run(out: Path, workers: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for fid in FIGURES:
        path = out / f"{fid}.csv"
        code = main(["figure", fid, "--workers", str(workers), "--out", str(path)])
        summary = [ln for ln in path.read_text().splitlines() if ln.startswith("# summary.")]
        print(f"{fid}: exit {code}")
        for line in summary:
            print("   ", line[2:])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    run(args.out, args.workers)
