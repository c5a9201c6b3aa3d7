"""Run every audit on its default grid (or a refined one) and print the report lines and components."""
import argparse
import time

from latticephase.lemma_audit import CATALOGUE, LEMMA_IDS, audit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ids", nargs="*", default=list(LEMMA_IDS))
    ap.add_argument("--refine", type=int, default=1, help="nested refinement factor")
    args = ap.parse_args()

    failed = 0
    for i in args.ids:
        grid = CATALOGUE[i].default_grid
        if args.refine > 1:
            grid = grid.refined(args.refine)
        t0 = time.perf_counter()
        rep = audit(i, grid)
        print(f"{rep.line()}  nodes={rep.nodes} {time.perf_counter() - t0:.1f}s")
        for name, m in rep.components.items():
            print(f"    {name}: {m:.4g}")
        failed += not rep.passed
    print(f"{len(args.ids) - failed}/{len(args.ids)} passed")


if __name__ == "__main__":
    main()
