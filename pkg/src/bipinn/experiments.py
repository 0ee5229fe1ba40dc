"""Experiment presets: architecture evolution, bare-minimum sweep, modular vs dense.

Every preset writes one subdirectory per run (metrics, snapshots, final
report) plus a summary table at the top of its output directory.  Runs are
independent, so ``jobs > 1`` farms them out to worker processes; tables are
always assembled in (problem, depth, seed) order.
"""

from __future__ import annotations

import csv
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import RunConfig
from .modular import ExtractionError, ModuleTemplate, build_modular, extract_template, train_modular
from .trainer import train

log = logging.getLogger(__name__)

# single-harmonic sources k^2 sin(kt); each has exact solution -sin(kt)
SINGLE_HARMONICS = {
    "sin1": (1.0,),
    "sin2": (0.0, 4.0),
    "sin3": (0.0, 0.0, 9.0),
    "sin4": (0.0, 0.0, 0.0, 16.0),
}
FIG4_PROBLEMS = ("logistic",) + tuple(SINGLE_HARMONICS)


def problem_config(name: str, base: RunConfig | None = None) -> RunConfig:
    cfg = replace(base) if base is not None else RunConfig()
    if name == "logistic":
        cfg.problem = "logistic"
    elif name in SINGLE_HARMONICS:
        cfg.problem = "poisson_harmonic"
        cfg.coefficients = list(SINGLE_HARMONICS[name])
    elif name == "harmonic4":
        cfg.problem = "poisson_harmonic"
        cfg.coefficients = [1.0, 4.0, 9.0, 16.0]
    else:
        raise ValueError(f"unknown problem name {name!r}")
    return cfg


def run_config(cfg: RunConfig, out_dir=None) -> dict:
    """Train one configuration and return a flat summary row."""
    record = train(cfg.architecture(), cfg.problem_spec(), cfg.train_config(), out_dir=out_dir)
    row = {
        "active_hidden_units": record.active_hidden_units,
        "active_per_layer": record.prune_stats[0].active_units_per_layer,
        "nonzero_fraction": record.nonzero_fraction,
        "test_mse": record.final_report.mse,
        "test_euclidean": record.final_report.euclidean,
    }
    if out_dir is not None:
        cfg.save(Path(out_dir) / "config.json")
        try:
            extract_template(record.network).save(Path(out_dir) / "template.json")
        except ExtractionError as exc:
            log.warning("no template for %s: %s", out_dir, exc)
    return row


def _map(fn, jobs_args, jobs: int):
    if jobs <= 1:
        return [fn(*a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *a) for a in jobs_args]
        return [f.result() for f in futures]


def _write_csv(path: Path, rows: list[dict]):
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


# ---------------------------------------------------------------- presets


def fig2(out, epochs: int = 400_000, seeds: int = 1, jobs: int = 1, metrics_every: int = 1000) -> dict:
    """Brain-inspired vs dense 2x21 network on the four-harmonic benchmark."""
    out = Path(out)
    args = []
    for seed in range(seeds):
        base = problem_config("harmonic4")
        base.layer_sizes = [1, 21, 21, 1]
        base.epochs = epochs
        base.seed = seed
        base.metrics_every = metrics_every
        base.snapshot_every = max(epochs // 8, 1)
        args.append((base, out / f"bimt_s{seed}"))
        args.append((replace(base, bimt_enabled=False), out / f"dense_s{seed}"))
    rows = _map(run_config, args, jobs)
    summary = {"epochs": epochs, "bimt": rows[0::2], "dense": rows[1::2]}
    for kind in ("bimt", "dense"):
        summary[f"{kind}_median_test_euclidean"] = statistics.median(r["test_euclidean"] for r in summary[kind])
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def fig4(
    out,
    epochs: int = 100_000,
    seeds: int = 3,
    depths=(1, 2),
    problems=FIG4_PROBLEMS,
    jobs: int = 1,
    metrics_every: int = 1000,
) -> list[dict]:
    """Bare-minimum architectures for simple problems at one and two hidden layers."""
    out = Path(out)
    keys, args = [], []
    for name in problems:
        for depth in depths:
            for seed in range(seeds):
                cfg = problem_config(name)
                cfg.layer_sizes = [1] + [21] * depth + [1]
                cfg.epochs = epochs
                cfg.seed = seed
                cfg.metrics_every = metrics_every
                keys.append((name, depth, seed))
                args.append((cfg, out / f"{name}_d{depth}_s{seed}"))
    results = _map(run_config, args, jobs)
    out.mkdir(parents=True, exist_ok=True)
    rows = [{"problem": n, "depth": d, "seed": s, **r} for (n, d, s), r in zip(keys, results)]
    _write_csv(out / "fig4.csv", rows)
    summary = []
    for name in problems:
        for depth in depths:
            sel = [r for r in rows if r["problem"] == name and r["depth"] == depth]
            summary.append({
                "problem": name,
                "depth": depth,
                "median_active_hidden_units": statistics.median(r["active_hidden_units"] for r in sel),
                "median_test_euclidean": statistics.median(r["test_euclidean"] for r in sel),
            })
    _write_csv(out / "fig4_summary.csv", summary)
    return rows


def _fig5_run(kind: str, template_json: dict, k: int, cfg: RunConfig, out_dir: Path) -> dict:
    spec = cfg.problem_spec()
    tcfg = replace(cfg.train_config(), bimt_enabled=False)
    if kind == "modular":
        template = ModuleTemplate.from_json(template_json)
        mnet = build_modular(template, k, seed=cfg.seed, bias=cfg.bias_init)
        record = train_modular(mnet, spec, tcfg, out_dir=out_dir)
    else:
        record = train(cfg.architecture(), spec, tcfg, out_dir=out_dir)
    cfg.save(out_dir / "config.json")
    return {
        "model": kind,
        "seed": cfg.seed,
        "parameters": sum(net.n_parameters() for net in record.networks),
        "test_mse": record.final_report.mse,
        "test_euclidean": record.final_report.euclidean,
    }


def fig5(
    out,
    epochs: int = 100_000,
    seeds: int = 3,
    template: ModuleTemplate | None = None,
    k: int = 3,
    jobs: int = 1,
    metrics_every: int = 1000,
) -> dict:
    """Summed copies of a bare-minimum module against a dense net with as many hidden units."""
    out = Path(out)
    template = template if template is not None else ModuleTemplate.dense((1, 3, 1))
    out.mkdir(parents=True, exist_ok=True)
    template.save(out / "template.json")
    width = k * template.hidden_units
    args = []
    for seed in range(seeds):
        cfg = problem_config("harmonic4")
        cfg.epochs = epochs
        cfg.seed = seed
        cfg.metrics_every = metrics_every
        cfg.bimt_enabled = False
        cfg.layer_sizes = [1, width, 1]
        args.append(("modular", template.to_json(), k, cfg, out / f"modular_s{seed}"))
        args.append(("dense", template.to_json(), k, cfg, out / f"dense_s{seed}"))
    rows = _map(_fig5_run, args, jobs)
    _write_csv(out / "fig5.csv", rows)
    summary = {"epochs": epochs, "k": k, "template": template.to_json(), "dense_width": width}
    for kind in ("modular", "dense"):
        sel = [r for r in rows if r["model"] == kind]
        summary[kind] = {
            "median_test_mse": statistics.median(r["test_mse"] for r in sel),
            "median_test_euclidean": statistics.median(r["test_euclidean"] for r in sel),
            "parameters": sel[0]["parameters"],
        }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


PRESETS = {"fig2": fig2, "fig4": fig4, "fig5": fig5}
