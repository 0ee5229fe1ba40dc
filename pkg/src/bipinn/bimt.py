"""Locality-weighted L1 regularisation, the three-phase schedule and unit swaps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .autodiff import Scalar
from .network import GeometricNetwork, TapedParams, swap


@dataclass(frozen=True)
class PhaseSchedule:
    total_epochs: int = 100_000
    lambda_phase1: float = 0.001
    lambda_phase2: float = 0.01
    lambda_phase3: float = 0.001
    bias_penalty_in_phase3: bool = True
    weight_penalty_in_phase3: bool = True

    def __post_init__(self):
        if self.total_epochs < 1:
            raise ValueError("total_epochs must be >= 1")
        if min(self.lambda_phase1, self.lambda_phase2, self.lambda_phase3) < 0:
            raise ValueError("penalty strengths must be non-negative")

    @property
    def boundary1(self) -> int:
        return self.total_epochs // 4

    @property
    def boundary2(self) -> int:
        return 3 * self.total_epochs // 4

    @classmethod
    def disabled(cls, total_epochs: int) -> "PhaseSchedule":
        return cls(total_epochs, 0.0, 0.0, 0.0, False, False)


@dataclass(frozen=True)
class RegularizerConfig:
    A: float = 2.0
    swap_interval: int = 200

    def __post_init__(self):
        if self.A < 0:
            raise ValueError("A must be non-negative")
        if self.swap_interval < 1:
            raise ValueError("swap_interval must be >= 1")


@dataclass
class PenaltyBreakdown:
    weight_term: float
    bias_term: float
    lam: float

    @property
    def total(self) -> float:
        return self.lam * (self.weight_term + self.bias_term)


def lambda_at(epoch: int, sched: PhaseSchedule) -> tuple[float, bool]:
    if not 0 <= epoch < sched.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {sched.total_epochs})")
    if epoch < sched.boundary1:
        return sched.lambda_phase1, False
    if epoch < sched.boundary2:
        return sched.lambda_phase2, False
    return sched.lambda_phase3, sched.bias_penalty_in_phase3


def penalty_flags(epoch: int, sched: PhaseSchedule) -> tuple[float, bool, bool]:
    """``(lam, weights_on, bias_on)`` for an epoch."""
    lam, bias_on = lambda_at(epoch, sched)
    weights_on = epoch < sched.boundary2 or sched.weight_penalty_in_phase3
    return lam, weights_on, bias_on


def distance(net: GeometricNetwork, unit_a: tuple[int, int], unit_b: tuple[int, int]) -> float:
    """Euclidean distance between two ``(layer, index)`` units."""
    (la, ia), (lb, ib) = unit_a, unit_b
    if abs(la - lb) != 1:
        raise ValueError("units must sit in adjacent layers")
    return float(np.hypot(*(net.coords[la][ia] - net.coords[lb][ib])))


def edge_distances(net: GeometricNetwork) -> list[np.ndarray]:
    """Per weight matrix, the length of every edge (same shape as the weights)."""
    out = []
    for l in range(net.arch.n_layers):
        src, dst = net.coords[l], net.coords[l + 1]
        dx = dst[:, None, 0] - src[None, :, 0]
        dy = dst[:, None, 1] - src[None, :, 1]
        out.append(np.sqrt(dx * dx + dy * dy))
    return out


def reg_penalty(net: GeometricNetwork, params: TapedParams, lam: float, bias_on: bool) -> Scalar:
    """Penalty ``lam * (sum d|w| + [bias_on] sum |b|)`` recorded on the tape."""
    tape = params.tape
    terms = []
    for Wl, D in zip(params.weights, edge_distances(net)):
        for i, row in enumerate(Wl):
            for j, w in enumerate(row):
                if w is not None:
                    terms.append(float(D[i, j]) * w.abs())
    if bias_on:
        for bl in params.biases:
            terms += [b.abs() for b in bl if b is not None]
    return lam * tape.sum(terms)


def penalty(net: GeometricNetwork, lam: float, bias_on: bool, distances=None, weights_on=True) -> PenaltyBreakdown:
    distances = distances if distances is not None else edge_distances(net)
    wt = float(sum(np.sum(D * np.abs(W)) for D, W in zip(distances, net.weights))) if weights_on else 0.0
    bt = float(sum(np.sum(np.abs(b)) for b in net.biases)) if bias_on else 0.0
    return PenaltyBreakdown(wt, bt, lam)


def penalty_grad(net: GeometricNetwork, lam: float, bias_on: bool, distances=None, weights_on=True) -> list[np.ndarray]:
    """Subgradient of :func:`penalty` in ``params()`` order, with sign(0) = 0."""
    distances = distances if distances is not None else edge_distances(net)
    out = []
    for D, W, b in zip(distances, net.weights, net.biases):
        out.append(lam * D * np.sign(W) if weights_on else np.zeros_like(W))
        out.append(lam * np.sign(b) if bias_on else np.zeros_like(b))
    return out


def _placement_costs(net: GeometricNetwork, layer: int, distances) -> np.ndarray:
    """``M[i, s]``: weighted length of unit i's edges if it sat in slot s."""
    w_in = np.abs(net.weights[layer - 1])
    w_out = np.abs(net.weights[layer])
    return w_in @ distances[layer - 1].T + w_out.T @ distances[layer]


def try_swaps(
    net: GeometricNetwork,
    lam: float,
    bias_on: bool = False,
    on_swap: Callable[[int, int, int], None] | None = None,
    max_passes: int = 100,
) -> tuple[GeometricNetwork, int]:
    """Greedy locality-improving swaps within each hidden layer, in place.

    Units are visited in order of decreasing importance.  Each visited unit
    is exchanged with whichever unit of its layer gives the largest strict
    drop of the distance-weighted weight term.  Passes repeat until one
    commits nothing, so the result is a local optimum under single swaps.
    Biases move with their units and cannot change the penalty, so
    ``bias_on`` is accepted for signature symmetry only.

    ``on_swap(layer, i, j)`` is called after each committed swap, e.g. to
    permute optimizer state alongside the parameters.
    """
    if lam <= 0:
        return net, 0
    distances = edge_distances(net)
    made = 0
    for _ in range(max_passes):
        made_this_pass = 0
        for layer in net.arch.hidden_layers:
            n = net.arch.layer_sizes[layer]
            if n < 2:
                continue
            imp = np.abs(net.weights[layer - 1]).sum(axis=1) + np.abs(net.weights[layer]).sum(axis=0)
            order = np.argsort(-imp, kind="stable")
            slot_of = np.arange(n)
            for unit in order:
                a = int(slot_of[unit])
                M = _placement_costs(net, layer, distances)
                diag = np.diag(M)
                delta = M[a, :] + M[:, a] - diag[a] - diag
                delta[a] = 0.0
                b = int(np.argmin(delta))
                if delta[b] < -1e-12 * (diag[a] + diag[b]):
                    swap(net, layer, a, b)
                    if on_swap is not None:
                        on_swap(layer, a, b)
                    # keep track of where each original unit now lives
                    ua, ub = np.flatnonzero(slot_of == a)[0], np.flatnonzero(slot_of == b)[0]
                    slot_of[ua], slot_of[ub] = b, a
                    made_this_pass += 1
        made += made_this_pass
        if not made_this_pass:
            break
    return net, made
