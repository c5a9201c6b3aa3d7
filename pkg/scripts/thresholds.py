"""Solve for alpha_a, alpha_b and the gamma-family thresholds and print a short report."""
import argparse

from latticephase import solve_alpha_a, solve_alpha_b, thresholds_for_gamma


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="*", default=[0.0, 0.5, 1.0, 2.0])
    args = ap.parse_args()

    a, b = solve_alpha_a(), solve_alpha_b()
    for r in (a, b):
        print(f"{r.name:8s} {r.value:.13f}  1/value={1 / r.value:.13f}  residual={r.residual:.2e}  "
              f"iterations={r.iterations}  cross_check={float(r.cross_check):.13f}")
    print()
    print("gamma      alpha_g1        alpha_g2")
    for g in args.gammas:
        g1, g2 = thresholds_for_gamma(g)
        print(f"{g:<8g}  {g1.value:.10f}  {g2.value:.10f}")


if __name__ == "__main__":
    main()
