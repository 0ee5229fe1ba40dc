"""PINN loss, AdamW and the training loop with BIMT phases, swaps and pruning."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bimt
from .bimt import PhaseSchedule, RegularizerConfig
from .network import (
    Architecture,
    GeometricNetwork,
    backward_batch,
    forward_batch,
    forward_jet,
    init_xavier,
    lift_params,
    prune,
    prune_stats,
    save_snapshot,
)
from .problems import (
    LOGISTIC,
    CollocationSet,
    ErrorReport,
    ProblemSpec,
    boundary_residual,
    residual,
    sample_collocation,
    test_error,
)

log = logging.getLogger(__name__)

METRIC_FIELDS = (
    "epoch",
    "total_loss",
    "pde_loss",
    "bc_loss",
    "reg_loss",
    "test_mse",
    "test_euclidean",
    "active_units",
    "nonzero_weights",
    "swaps_made",
)


@dataclass
class TrainConfig:
    epochs: int = 100_000
    learning_rate: float = 0.002
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.0
    seed: int = 0
    bimt_enabled: bool = True
    schedule: PhaseSchedule | None = None
    reg: RegularizerConfig = field(default_factory=RegularizerConfig)
    prune_threshold: float = 1e-3
    metrics_every: int = 1000
    snapshot_every: int = 0
    n_interior: int = 1000
    n_boundary: int = 50
    n_test: int = 100
    bias_init: float = 0.01

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.metrics_every < 1:
            raise ValueError("metrics_every must be >= 1")
        if self.schedule is None:
            self.schedule = PhaseSchedule(self.epochs)
        elif self.schedule.total_epochs != self.epochs:
            self.schedule = replace(self.schedule, total_epochs=self.epochs)


class TrainingDiverged(RuntimeError):
    def __init__(self, message, record: "RunRecord"):
        super().__init__(message)
        self.record = record


@dataclass
class RunRecord:
    metrics: list[dict] = field(default_factory=list)
    snapshots: list[str] = field(default_factory=list)
    final_report: ErrorReport | None = None
    prune_stats: list = field(default_factory=list)
    networks: list[GeometricNetwork] = field(default_factory=list)
    diverged: str | None = None

    @property
    def network(self) -> GeometricNetwork:
        return self.networks[0]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.metrics])

    @property
    def active_hidden_units(self) -> int:
        return sum(s.active_hidden_units for s in self.prune_stats)

    @property
    def nonzero_fraction(self) -> float:
        nz = sum(s.nonzero_weights for s in self.prune_stats)
        total = sum(s.total_weights for s in self.prune_stats)
        return nz / total if total else 0.0

    def summary(self) -> dict:
        return {
            "final_report": self.final_report.to_dict() if self.final_report else None,
            "prune_stats": [s.to_dict() for s in self.prune_stats],
            "active_hidden_units": self.active_hidden_units,
            "active_units_per_layer": [s.active_units_per_layer for s in self.prune_stats],
            "nonzero_fraction": self.nonzero_fraction,
            "diverged": self.diverged,
        }


# ---------------------------------------------------------------- losses


def instances_of(model) -> list[GeometricNetwork]:
    if isinstance(model, GeometricNetwork):
        return [model]
    return list(model.instances)


def pinn_loss(model, spec: ProblemSpec, colloc: CollocationSet, params=None):
    """Composite residual MSE on a scalar tape.

    Returns ``(loss, breakdown, params)`` where ``params`` holds the taped
    parameters of each instance, so the caller can read gradients off
    ``backward(loss)``.
    """
    nets = instances_of(model)
    if params is None:
        params = []
        tape = None
        for net in nets:
            p = lift_params(net, tape)
            tape = p.tape
            params.append(p)
    tape = params[0].tape

    def output(t):
        jet = forward_jet(nets[0], t, params[0])
        for net, p in zip(nets[1:], params[1:]):
            jet = jet + forward_jet(net, t, p)
        return jet

    pde_terms = [residual(spec, output(t), t).square() for t in colloc.interior]
    pde = tape.sum(pde_terms) / len(pde_terms)
    bc_parts = []
    for which, pts in enumerate(colloc.boundary):
        terms = [boundary_residual(spec, output(t).u, which).square() for t in pts]
        bc_parts.append(tape.sum(terms) / len(terms))
    bc = tape.sum(bc_parts)
    loss = pde + bc
    return loss, {"pde_loss": pde.value, "bc_loss": bc.value}, params


class BatchedLoss:
    """The same composite loss evaluated over all points at once in numpy."""

    def __init__(self, spec: ProblemSpec, colloc: CollocationSet):
        self.spec = spec
        self.n_int = len(colloc.interior)
        self.bc_slices = []
        start = self.n_int
        for pts in colloc.boundary:
            self.bc_slices.append(slice(start, start + len(pts)))
            start += len(pts)
        self.points = np.concatenate([colloc.interior] + list(colloc.boundary))
        self.bc_values = [v for _, v in spec.boundary_conditions]
        self.source = spec.source(colloc.interior) if spec.kind != LOGISTIC else None

    def __call__(self, nets: list[GeometricNetwork]):
        """``(pde_loss, bc_loss, grads)`` with one gradient list per instance."""
        out = [forward_batch(net, self.points) for net in nets]
        u = sum(o[0] for o in out)
        du = sum(o[1] for o in out)
        ddu = sum(o[2] for o in out)
        n = self.n_int
        g_u = np.zeros_like(u)
        g_du = np.zeros_like(u)
        g_ddu = np.zeros_like(u)
        if self.spec.kind == LOGISTIC:
            ui = u[:n]
            r = du[:n] - self.spec.rate * ui * (1.0 - ui)
            g_du[:n] = 2.0 * r / n
            g_u[:n] = -2.0 * r / n * self.spec.rate * (1.0 - 2.0 * ui)
        else:
            r = ddu[:n] - self.source
            g_ddu[:n] = 2.0 * r / n
        pde = float(np.mean(r * r))
        bc = 0.0
        for sl, value in zip(self.bc_slices, self.bc_values):
            rb = u[sl] - value
            m = len(rb)
            bc += float(np.mean(rb * rb))
            g_u[sl] += 2.0 * rb / m
        grads = [backward_batch(net, o[3], g_u, g_du, g_ddu) for net, o in zip(nets, out)]
        return pde, bc, grads


# ---------------------------------------------------------------- optimizer


class AdamW:
    """Adam with decoupled weight decay over a flat list of arrays.

    Entries whose mask is False keep their value and moment state.
    """

    def __init__(self, params: list[np.ndarray], lr=0.002, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.step_count = 0

    def step(self, params, grads, masks=None):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.step_count
        c2 = 1.0 - b2**self.step_count
        masks = masks if masks is not None else [None] * len(params)
        for p, g, m, v, mask in zip(params, grads, self.m, self.v, masks):
            m_new = b1 * m + (1.0 - b1) * g
            v_new = b2 * v + (1.0 - b2) * (g * g)
            update = self.lr * ((m_new / c1) / (np.sqrt(v_new / c2) + self.eps) + self.weight_decay * p)
            if mask is None or mask.all():
                m[...] = m_new
                v[...] = v_new
                p -= update
            else:
                np.copyto(m, m_new, where=mask)
                np.copyto(v, v_new, where=mask)
                np.subtract(p, update, out=p, where=mask)


def adamw_step(state: AdamW, net: GeometricNetwork, grads, lr: float | None = None) -> GeometricNetwork:
    if lr is not None:
        state.lr = lr
    state.step(net.params(), grads, net.masks())
    return net


def _swap_state(arrays: list[np.ndarray], layer: int, i: int, j: int):
    """Permute per-parameter arrays (``params()`` layout) like ``network.swap``."""
    p, q = [i, j], [j, i]
    for arr in (arrays[2 * (layer - 1)], arrays[2 * (layer - 1) + 1]):
        arr[p] = arr[q]
    out = arrays[2 * layer]
    out[:, p] = out[:, q]


# ---------------------------------------------------------------- training


def _count_live(nets, threshold):
    active = nonzero = 0
    for net in nets:
        trial, stats = prune(net.copy(), threshold)
        active += stats.active_hidden_units
        nonzero += stats.nonzero_weights
    return active, nonzero


class _Predictor:
    def __init__(self, nets):
        self.nets = nets

    def predict(self, t):
        from .network import forward_value

        return sum(forward_value(net, t) for net in self.nets)


def fit(nets: list[GeometricNetwork], spec: ProblemSpec, config: TrainConfig, colloc=None, out_dir=None) -> RunRecord:
    """Train a sum of one or more networks in place and return the record."""
    if colloc is None:
        colloc = sample_collocation(spec, config.n_interior, config.n_boundary, config.n_test, seed=config.seed)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    loss_fn = BatchedLoss(spec, colloc)
    params = [p for net in nets for p in net.params()]
    masks = [m for net in nets for m in net.masks()]
    opt = AdamW(params, config.learning_rate, config.betas, config.eps, config.weight_decay)
    offsets = np.cumsum([0] + [len(net.params()) for net in nets])
    distances = [bimt.edge_distances(net) for net in nets]
    predictor = _Predictor(nets)
    record = RunRecord(networks=nets)
    sched = config.schedule
    swaps_since_row = 0

    writer = fh = None
    if out is not None:
        fh = open(out / "metrics.csv", "w", newline="")
        writer = csv.DictWriter(fh, fieldnames=METRIC_FIELDS)
        writer.writeheader()

    try:
        for epoch in range(config.epochs):
            pde, bc, grads = loss_fn(nets)
            if config.bimt_enabled:
                lam, weights_on, bias_on = bimt.penalty_flags(epoch, sched)
            else:
                lam, weights_on, bias_on = 0.0, False, False
            reg = 0.0
            if lam > 0:
                for k, net in enumerate(nets):
                    reg += bimt.penalty(net, lam, bias_on, distances[k], weights_on).total
                    for g, gp in zip(grads[k], bimt.penalty_grad(net, lam, bias_on, distances[k], weights_on)):
                        g += gp
            total = pde + bc + reg
            row_due = epoch % config.metrics_every == 0
            if row_due or not math.isfinite(total):
                rep = test_error(predictor, spec, colloc)
                active, nonzero = _count_live(nets, config.prune_threshold)
                row = dict(zip(METRIC_FIELDS, (
                    epoch, total, pde, bc, reg, rep.mse, rep.euclidean, active, nonzero, swaps_since_row,
                )))
                record.metrics.append(row)
                swaps_since_row = 0
                if writer is not None:
                    writer.writerow(row)
                    fh.flush()
            if not math.isfinite(total):
                record.diverged = f"non-finite loss at epoch {epoch}"
                raise TrainingDiverged(record.diverged, record)
            if out is not None and config.snapshot_every and epoch % config.snapshot_every == 0:
                record.snapshots += _write_snapshots(nets, out, epoch)

            opt.step(params, [g for gs in grads for g in gs], masks)

            if config.bimt_enabled and (epoch + 1) % config.reg.swap_interval == 0:
                for k, net in enumerate(nets):
                    lo, hi = offsets[k], offsets[k + 1]

                    def permute_state(layer, i, j, lo=lo, hi=hi):
                        _swap_state(opt.m[lo:hi], layer, i, j)
                        _swap_state(opt.v[lo:hi], layer, i, j)

                    _, made = bimt.try_swaps(net, lam, bias_on, on_swap=permute_state)
                    swaps_since_row += made
    finally:
        if fh is not None:
            fh.close()

    record.prune_stats = [prune(net, config.prune_threshold)[1] for net in nets]
    record.final_report = test_error(predictor, spec, colloc)
    if out is not None:
        record.snapshots += _write_snapshots(nets, out, config.epochs)
    log.info("finished %d epochs: %s", config.epochs, record.final_report)
    return record


def _write_snapshots(nets, out: Path, epoch: int) -> list[str]:
    paths = []
    for k, net in enumerate(nets):
        name = f"snapshot_{epoch}.json" if len(nets) == 1 else f"snapshot_{epoch}_m{k}.json"
        save_snapshot(net, out / name, epoch)
        paths.append(str(out / name))
    return paths


def train(arch: Architecture, spec: ProblemSpec, config: TrainConfig, out_dir=None) -> RunRecord:
    """Initialise a network from ``config.seed`` and train it.

    The geometry scale used for the locality penalty is ``config.reg.A``;
    the architecture's own ``A`` is overridden to match.
    """
    arch = replace(arch, A=config.reg.A)
    net = init_xavier(arch, config.seed, config.bias_init)
    record = fit([net], spec, config, out_dir=out_dir)
    if out_dir is not None:
        write_final_report(record, out_dir)
    return record


def evaluate(model, spec: ProblemSpec, colloc: CollocationSet) -> ErrorReport:
    if isinstance(model, GeometricNetwork):
        return test_error(model, spec, colloc)
    return test_error(_Predictor(instances_of(model)), spec, colloc)


def write_final_report(record: RunRecord, out_dir):
    Path(out_dir, "final_report.json").write_text(json.dumps(record.summary(), indent=2))


def config_to_dict(config: TrainConfig) -> dict:
    return asdict(config)
