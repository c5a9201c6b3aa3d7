"""Sweep alpha for one potential and write the minimizer table as CSV."""
import argparse
import csv
import sys

import numpy as np

from latticephase import Mode, PotentialSpec, phase_diagram


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spec", default="m")
    ap.add_argument("--alpha-from", type=float, default=0.5)
    ap.add_argument("--alpha-to", type=float, default=1.5)
    ap.add_argument("--steps", type=int, default=41)
    ap.add_argument("--mode", choices=("full", "guided"), default=None)
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()

    spec = PotentialSpec.parse(args.spec)
    alphas = np.linspace(args.alpha_from, args.alpha_to, args.steps)
    rows = phase_diagram(spec, list(alphas), Mode.parse(args.mode) if args.mode else None)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["alpha", "label", "x", "y", "energy"])
    for r in rows:
        w.writerow([f"{r.alpha:.10g}", r.label, f"{r.minimizer.x:.10g}", f"{r.minimizer.y:.10g}",
                    f"{r.energy:.12g}"])
    if args.output:
        out.close()
    # transitions
    for r0, r1 in zip(rows, rows[1:]):
        if r0.label.kind != r1.label.kind:
            print(f"# {r0.label} -> {r1.label} between alpha={r0.alpha:.6g} and {r1.alpha:.6g}", file=sys.stderr)


if __name__ == "__main__":
    main()
