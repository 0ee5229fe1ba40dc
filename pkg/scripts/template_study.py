"""Modular-vs-dense comparison with a template pulled from a trained net.

Trains one sparse k=1 network, extracts its surviving structure as a module
template, then runs the modular/dense comparison with that template instead
of the default dense 1-3-1 block.
"""

import argparse
import json
from pathlib import Path

from bipinn import experiments
from bipinn.experiments import problem_config, run_config
from bipinn.modular import ModuleTemplate


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="runs/template_study")
    parser.add_argument("--epochs", type=int, default=50_000)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    out = Path(args.out)
    cfg = problem_config("sin1")
    run_config(cfg, out / "source")
    template = ModuleTemplate.load(out / "source" / "template.json")
    print("template layers", template.layer_sizes)
    summary = experiments.fig5(out / "fig5", epochs=args.epochs, seeds=args.seeds, template=template, jobs=args.jobs)
    summary.pop("template")
    print(json.dumps(summary, indent=1))


if __name__ == "__main__":
    main()
