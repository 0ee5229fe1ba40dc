"""Bare-minimum templates and summed modular networks.

A template is the topology that survives pruning: inactive hidden units are
dropped and the remaining connectivity is kept as a mask.  A modular network
is ``k`` freshly initialised copies of a template fed the same input, with
outputs added together.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .activations import ActivationKind
from .autodiff import Jet, Tape
from .network import Architecture, GeometricNetwork, forward_jet, forward_value, init_xavier, lift_params
from .problems import ProblemSpec
from .trainer import RunRecord, TrainConfig, fit, write_final_report


class ExtractionError(ValueError):
    pass


@dataclass
class ModuleTemplate:
    layer_sizes: tuple[int, ...]
    weight_mask: list[np.ndarray]
    bias_mask: list[np.ndarray]
    activation: ActivationKind = ActivationKind.SINLU
    final_activation: bool = False

    @classmethod
    def dense(cls, layer_sizes, activation=ActivationKind.SINLU) -> "ModuleTemplate":
        sizes = tuple(layer_sizes)
        return cls(
            sizes,
            [np.ones((n_out, n_in), dtype=bool) for n_in, n_out in zip(sizes[:-1], sizes[1:])],
            [np.ones(n, dtype=bool) for n in sizes[1:]],
            ActivationKind.parse(activation),
        )

    @property
    def hidden_units(self) -> int:
        return int(sum(self.layer_sizes[1:-1]))

    def architecture(self, A: float = 2.0) -> Architecture:
        return Architecture(self.layer_sizes, self.activation, self.final_activation, A)

    def to_json(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "mask": [m.tolist() for m in self.weight_mask],
            "bias_mask": [m.tolist() for m in self.bias_mask],
            "activation": self.activation.value,
            "final_activation": self.final_activation,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModuleTemplate":
        sizes = tuple(data["layer_sizes"])
        wm = [np.array(m, dtype=bool).reshape(sizes[l + 1], sizes[l]) for l, m in enumerate(data["mask"])]
        bm = data.get("bias_mask")
        bm = [np.array(m, dtype=bool) for m in bm] if bm is not None else [np.ones(n, dtype=bool) for n in sizes[1:]]
        return cls(sizes, wm, bm, ActivationKind.parse(data["activation"]), bool(data.get("final_activation", False)))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "ModuleTemplate":
        return cls.from_json(json.loads(Path(path).read_text()))


def _live(net: GeometricNetwork):
    w = [(W != 0) & m for W, m in zip(net.weights, net.weight_mask)]
    b = [(bb != 0) & m for bb, m in zip(net.biases, net.bias_mask)]
    return w, b


def surviving_units(net: GeometricNetwork) -> list[np.ndarray]:
    """Active units per layer (input and output included), iterated to a fixed point.

    Unlike the one-step rule of :func:`network.active_units`, a unit whose
    only outgoing edges lead to dropped units is dropped as well.
    """
    sizes = net.arch.layer_sizes
    w, b = _live(net)
    alive = [np.ones(n, dtype=bool) for n in sizes]
    changed = True
    while changed:
        changed = False
        for l in net.arch.hidden_layers:
            fed = w[l - 1][:, alive[l - 1]].any(axis=1) | b[l - 1]
            feeds = w[l][alive[l + 1], :].any(axis=0)
            keep = alive[l] & fed & feeds
            if not np.array_equal(keep, alive[l]):
                alive[l] = keep
                changed = True
    return alive


def compact_network(net: GeometricNetwork) -> GeometricNetwork:
    """Copy of a pruned network with inactive hidden units removed."""
    alive = surviving_units(net)
    w, _ = _live(net)
    reach = np.ones(1, dtype=bool)
    for l in range(net.arch.n_layers):
        reach = w[l][:, reach].any(axis=1) & alive[l + 1]
    if not reach.any():
        raise ExtractionError("no active path from input to output")
    sizes = tuple(int(a.sum()) for a in alive)
    weights, biases, wmask, bmask = [], [], [], []
    for l in range(net.arch.n_layers):
        rows, cols = alive[l + 1], alive[l]
        weights.append(net.weights[l][np.ix_(rows, cols)].copy())
        wmask.append(net.weight_mask[l][np.ix_(rows, cols)] & (weights[-1] != 0))
        biases.append(net.biases[l][rows].copy())
        bmask.append(net.bias_mask[l][rows] & (biases[-1] != 0))
    arch = replace(net.arch, layer_sizes=sizes)
    return GeometricNetwork(arch, weights, biases, wmask, bmask)


def extract_template(net: GeometricNetwork) -> ModuleTemplate:
    small = compact_network(net)
    return ModuleTemplate(
        small.arch.layer_sizes,
        [m.copy() for m in small.weight_mask],
        [m.copy() for m in small.bias_mask],
        small.arch.activation,
        small.arch.final_activation,
    )


def instantiate(template: ModuleTemplate, seed, bias: float = 0.01, A: float = 2.0) -> GeometricNetwork:
    net = init_xavier(template.architecture(A), seed, bias)
    net.weight_mask = [m.copy() for m in template.weight_mask]
    net.bias_mask = [m.copy() for m in template.bias_mask]
    net.apply_masks()
    return net


@dataclass
class ModularNetwork:
    templates: list[ModuleTemplate]
    instances: list[GeometricNetwork]

    @property
    def k(self) -> int:
        return len(self.instances)

    def predict(self, t) -> np.ndarray:
        return sum(forward_value(net, t) for net in self.instances)

    def n_parameters(self) -> int:
        return sum(net.n_parameters() for net in self.instances)


def build_modular(template, k: int, seed: int = 0, bias: float = 0.01) -> ModularNetwork:
    """``k`` independently initialised copies of ``template``.

    ``template`` may also be a list of templates, one per module.
    """
    templates = list(template) if isinstance(template, (list, tuple)) else [template] * k
    if k < 1 or len(templates) != k:
        raise ValueError(f"need k >= 1 templates, got k={k} and {len(templates)} templates")
    seeds = np.random.SeedSequence(seed).spawn(k)
    return ModularNetwork(templates, [instantiate(t, s, bias) for t, s in zip(templates, seeds)])


def forward_modular(mnet: ModularNetwork, t: float, tape: Tape | None = None) -> Jet:
    tape = tape if tape is not None else Tape()
    jets = [forward_jet(net, t, lift_params(net, tape)) for net in mnet.instances]
    out = jets[0]
    for jet in jets[1:]:
        out = out + jet
    return out


def train_modular(mnet: ModularNetwork, spec: ProblemSpec, config: TrainConfig, out_dir=None) -> RunRecord:
    """Plain PINN training of the summed modules: no locality penalty, no swaps."""
    config = replace(config, bimt_enabled=False)
    record = fit(mnet.instances, spec, config, out_dir=out_dir)
    if out_dir is not None:
        write_final_report(record, out_dir)
    return record
