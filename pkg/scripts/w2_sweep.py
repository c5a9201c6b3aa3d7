"""Global minimizer of W_2 over an alpha sweep.

The W_2 minimizer leaves the rectangular / square / hexagonal pattern that M
follows; this prints every alpha where that happens.
"""
import argparse

import numpy as np

from latticephase import W2, Mode, PhaseKind, global_minimize, solve_alpha_a


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha-from", type=float, default=0.5)
    ap.add_argument("--alpha-to", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=16)
    args = ap.parse_args()

    aa = solve_alpha_a().value
    for a in np.linspace(args.alpha_from, args.alpha_to, args.steps):
        r = global_minimize(W2, float(a), Mode.FULL)
        k = r.label.kind
        odd = not (k in (PhaseKind.SQUARE, PhaseKind.HEXAGONAL) or (k is PhaseKind.RECTANGULAR and a < aa))
        print(f"alpha={a:.4f}  {k.value:12s} {r.point}  energy={r.value:.10g}" + ("  <- off pattern" if odd else ""))


if __name__ == "__main__":
    main()
