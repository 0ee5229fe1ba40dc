"""Command-line entry point.

    bipinn train --config run.json [--set key=value ...] --out runs/a
    bipinn preset fig4 --out runs/fig4 [--epochs N] [--seeds N] [--jobs N]
    bipinn export-dot runs/a/snapshot_100000.json -o arch.dot
    bipinn defaults > run.json
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .config import RunConfig
from .modular import ExtractionError, ModuleTemplate, extract_template
from .network import active_units, from_snapshot
from .trainer import TrainingDiverged, train

log = logging.getLogger("bipinn")

PEN_PER_UNIT_WEIGHT = 5.0
PEN_MIN, PEN_MAX = 0.2, 5.0
COORD_SCALE = 2.0  # inches per coordinate unit in the drawing


# ---------------------------------------------------------------- DOT export


def export_dot(snapshot: dict) -> str:
    """Render a snapshot as a Graphviz digraph with pinned node positions.

    Hidden units that fail the active-unit rule are left out together with
    their edges.  Output is a pure function of the snapshot contents.
    """
    net = from_snapshot(snapshot)
    sizes = net.arch.layer_sizes
    shown = [np.ones(sizes[0], dtype=bool), *active_units(net), np.ones(sizes[-1], dtype=bool)]
    lines = [
        "digraph network {",
        "  graph [splines=false, outputorder=edgesfirst];",
        '  node [shape=circle, label="", width=0.15, style=filled, fillcolor=black];',
    ]
    for l, coords in enumerate(net.coords):
        for i, (x, y) in enumerate(coords):
            if shown[l][i]:
                lines.append(f'  "n{l}_{i}" [pos="{x * COORD_SCALE:.6f},{y * COORD_SCALE:.6f}!"];')
    for l, (W, m) in enumerate(zip(net.weights, net.weight_mask)):
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                w = float(W[i, j])
                if not m[i, j] or w == 0 or not (shown[l][j] and shown[l + 1][i]):
                    continue
                color = "red" if w > 0 else "blue"
                pen = min(max(PEN_PER_UNIT_WEIGHT * abs(w), PEN_MIN), PEN_MAX)
                lines.append(f'  "n{l}_{j}" -> "n{l + 1}_{i}" [color={color}, penwidth={pen:.4f}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- commands


def cmd_train(args) -> int:
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            print(f"error: config file not found: {path}", file=sys.stderr)
            return 2
        try:
            cfg = RunConfig.load(path)
        except (ValueError, TypeError) as exc:
            print(f"error: bad config {path}: {exc}", file=sys.stderr)
            return 2
    else:
        cfg = RunConfig()
    try:
        for item in args.set or []:
            key, sep, raw = item.partition("=")
            if not sep:
                raise ValueError(f"override {item!r} is not key=value")
            cfg.set(key.strip(), raw.strip())
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out is not None else Path(cfg.output_dir)
    cfg.output_dir = str(out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")
    try:
        record = train(cfg.architecture(), cfg.problem_spec(), cfg.train_config(), out_dir=out)
    except TrainingDiverged as exc:
        print(f"error: training diverged ({exc}); partial metrics in {out / 'metrics.csv'}", file=sys.stderr)
        return 3
    try:
        extract_template(record.network).save(out / "template.json")
    except ExtractionError as exc:
        log.warning("no module template: %s", exc)
    print(json.dumps(record.summary(), indent=2))
    return 0


def cmd_preset(args) -> int:
    kwargs = {"jobs": args.jobs}
    if args.epochs is not None:
        kwargs["epochs"] = args.epochs
    if args.seeds is not None:
        kwargs["seeds"] = args.seeds
    if args.metrics_every is not None:
        kwargs["metrics_every"] = args.metrics_every
    if args.template is not None:
        if args.name != "fig5":
            print("error: --template only applies to fig5", file=sys.stderr)
            return 2
        kwargs["template"] = ModuleTemplate.load(args.template)
    try:
        result = experiments.PRESETS[args.name](args.out, **kwargs)
    except TrainingDiverged as exc:
        print(f"error: a run diverged: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(result, indent=2, default=str))
    return 0


def cmd_export_dot(args) -> int:
    try:
        text = Path(args.snapshot).read_text()
        dot = export_dot(json.loads(text))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        Path(args.output).write_text(dot)
    else:
        sys.stdout.write(dot)
    return 0


def cmd_defaults(args) -> int:
    print(json.dumps(RunConfig().to_dict(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bipinn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one configuration")
    p.add_argument("--config", help="JSON run config (defaults are used when omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field; repeatable")
    p.add_argument("--out", help="output directory (default: the config's output_dir)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("preset", help="run a canned experiment")
    p.add_argument("name", choices=sorted(experiments.PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seeds", type=int, help="number of seeds, run as 0..N-1")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--metrics-every", type=int)
    p.add_argument("--template", help="fig5 only: module template JSON (default dense 1-3-1)")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("export-dot", help="draw a snapshot as Graphviz DOT")
    p.add_argument("snapshot")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("defaults", help="print the default run config as JSON")
    p.set_defaults(func=cmd_defaults)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
