"""Run all three canned experiments at full length.

Expect several hours on one core; pass --jobs to use more.  Output goes to
one subdirectory per preset under --out.
"""

import argparse
import logging
from pathlib import Path

from bipinn import experiments


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/reproduce")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--only", choices=sorted(experiments.PRESETS), action="append")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    todo = args.only or ["fig2", "fig4", "fig5"]
    if "fig2" in todo:
        experiments.fig2(out / "fig2", seeds=args.seeds, jobs=args.jobs)
    if "fig4" in todo:
        rows = experiments.fig4(out / "fig4", seeds=args.seeds, jobs=args.jobs)
        for r in rows:
            print(f"{r['problem']:9s} depth {r['depth']} seed {r['seed']}: "
                  f"{r['active_hidden_units']} active, euclidean {r['test_euclidean']:.4f}")
    if "fig5" in todo:
        s = experiments.fig5(out / "fig5", seeds=args.seeds, jobs=args.jobs)
        print("modular", s["modular"])
        print("dense  ", s["dense"])


if __name__ == "__main__":
    main()
