"""Geometric multilayer perceptron.

Every neuron carries a 2D coordinate: layer ``l`` sits at ``y = l`` and the
``n`` units of a layer are spread evenly over a centred segment of width
``A``.  Weights are dense matrices with boolean masks; a masked entry is held
at exactly 0.0 and never updated again.

Two evaluation paths exist.  :func:`forward_jet` builds the network on a
scalar tape, one collocation point at a time, and is the reference.
:func:`forward_batch` / :func:`backward_batch` evaluate all points at once in
numpy with a hand-written reverse pass; this is what the trainer runs.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels, activations
from .activations import ActivationKind
from .autodiff import Jet, Scalar, Tape, jet_affine, jet_chain, jet_seed


@dataclass(frozen=True)
class Architecture:
    layer_sizes: tuple[int, ...] = (1, 21, 1)
    activation: ActivationKind = ActivationKind.SINLU
    final_activation: bool = False
    A: float = 2.0

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if any(n < 1 for n in sizes):
            raise ValueError(f"layer sizes must be positive: {sizes}")
        if self.A < 0:
            raise ValueError("A must be non-negative")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))

    @property
    def n_layers(self) -> int:
        """Number of affine maps."""
        return len(self.layer_sizes) - 1

    @property
    def hidden_layers(self) -> range:
        return range(1, len(self.layer_sizes) - 1)


def layer_coordinates(layer_sizes, A: float) -> list[np.ndarray]:
    coords = []
    for level, n in enumerate(layer_sizes):
        k = np.arange(n, dtype=np.float64)
        x = A * (k - (n - 1) / 2.0) / max(n - 1, 1)
        coords.append(np.column_stack([x, np.full(n, float(level))]))
    return coords


@dataclass
class PruneStats:
    zeroed_weights: int
    zeroed_biases: int
    active_units_per_layer: list[int]
    total_weights: int = 0

    @property
    def nonzero_weights(self) -> int:
        return self.total_weights - self.zeroed_weights

    @property
    def nonzero_fraction(self) -> float:
        return self.nonzero_weights / self.total_weights if self.total_weights else 0.0

    @property
    def active_hidden_units(self) -> int:
        return int(sum(self.active_units_per_layer))

    def to_dict(self) -> dict:
        return {
            "zeroed_weights": self.zeroed_weights,
            "zeroed_biases": self.zeroed_biases,
            "active_units_per_layer": list(self.active_units_per_layer),
            "total_weights": self.total_weights,
            "nonzero_weights": self.nonzero_weights,
            "nonzero_fraction": self.nonzero_fraction,
        }


@dataclass
class GeometricNetwork:
    arch: Architecture
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    weight_mask: list[np.ndarray]
    bias_mask: list[np.ndarray]
    coords: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.coords:
            self.coords = layer_coordinates(self.arch.layer_sizes, self.arch.A)
        sizes = self.arch.layer_sizes
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l} has shape {W.shape}/{b.shape}, expected {sizes[l + 1]}x{sizes[l]}")

    def copy(self) -> "GeometricNetwork":
        return copy.deepcopy(self)

    def params(self) -> list[np.ndarray]:
        """Weights and biases interleaved: W0, b0, W1, b1, ..."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def masks(self) -> list[np.ndarray]:
        out = []
        for mW, mb in zip(self.weight_mask, self.bias_mask):
            out += [mW, mb]
        return out

    def apply_masks(self):
        for W, m in zip(self.weights, self.weight_mask):
            W[~m] = 0.0
        for b, m in zip(self.biases, self.bias_mask):
            b[~m] = 0.0

    def n_parameters(self) -> int:
        return int(sum(m.sum() for m in self.masks()))

    def __eq__(self, other):
        if not isinstance(other, GeometricNetwork) or self.arch != other.arch:
            return False
        pairs = zip(self.params() + self.masks() + self.coords, other.params() + other.masks() + other.coords)
        return all(np.array_equal(a, b) for a, b in pairs)


def init_xavier(arch: Architecture, seed: int = 0, bias: float = 0.01) -> GeometricNetwork:
    """Glorot-uniform weights, constant biases, everything unmasked."""
    rng = np.random.default_rng(seed)
    sizes = arch.layer_sizes
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(np.full(n_out, bias))
    return GeometricNetwork(
        arch,
        weights,
        biases,
        [np.ones_like(W, dtype=bool) for W in weights],
        [np.ones_like(b, dtype=bool) for b in biases],
    )


def _activates(net: GeometricNetwork, layer: int) -> bool:
    return layer < net.arch.n_layers - 1 or net.arch.final_activation


# ---------------------------------------------------------------- tape path


@dataclass
class TapedParams:
    """Network parameters recorded as leaf variables on a tape.

    Masked entries are left as ``None`` so they take no part in the graph.
    """

    tape: Tape
    weights: list[list[list[Scalar | None]]]
    biases: list[list[Scalar | None]]

    def leaves(self) -> list[tuple[int, int, int | None, Scalar]]:
        """``(param_index, row, col, scalar)`` for every live parameter.

        ``param_index`` follows :meth:`GeometricNetwork.params` ordering and
        ``col`` is None for biases.
        """
        out = []
        for l, (Wl, bl) in enumerate(zip(self.weights, self.biases)):
            for i, row in enumerate(Wl):
                for j, w in enumerate(row):
                    if w is not None:
                        out.append((2 * l, i, j, w))
            for i, b in enumerate(bl):
                if b is not None:
                    out.append((2 * l + 1, i, None, b))
        return out


def lift_params(net: GeometricNetwork, tape: Tape | None = None) -> TapedParams:
    tape = tape if tape is not None else Tape()
    weights, biases = [], []
    for W, mW, b, mb in zip(net.weights, net.weight_mask, net.biases, net.bias_mask):
        weights.append(
            [[tape.variable(W[i, j]) if mW[i, j] else None for j in range(W.shape[1])] for i in range(W.shape[0])]
        )
        biases.append([tape.variable(b[i]) if mb[i] else None for i in range(len(b))])
    return TapedParams(tape, weights, biases)


def forward_jet(net: GeometricNetwork, t: float, params: TapedParams | None = None) -> Jet:
    """Value, first and second t-derivative of the network output at ``t``."""
    if params is None:
        params = lift_params(net)
    tape = params.tape
    zero = tape.constant(0.0)
    layer = [jet_seed(t, tape)]
    for l, (Wl, bl) in enumerate(zip(params.weights, params.biases)):
        nxt = []
        for i, row in enumerate(Wl):
            live = [(w, z) for w, z in zip(row, layer) if w is not None]
            bias = bl[i] if bl[i] is not None else zero
            if live:
                z = jet_affine([w for w, _ in live], bias, [z for _, z in live])
            else:
                z = Jet(tape.sum([bias]), zero, zero)
            if _activates(net, l):
                z = jet_chain(activations.eval2(net.arch.activation, z.u), z)
            nxt.append(z)
        layer = nxt
    return layer[0]


# ---------------------------------------------------------------- numpy path


def forward_value(net: GeometricNetwork, t) -> np.ndarray:
    """Plain value-only forward pass over an array of inputs."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    h = t[None, :]
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        h = W @ h + b[:, None]
        if _activates(net, l):
            h = activations.value(net.arch.activation, h)
    return h[0]


def _matmul(A, B):
    # rank-1 products are much cheaper as broadcasts than through BLAS
    if A.shape[1] == 1:
        return A * B
    return A @ B


def forward_batch(net: GeometricNetwork, t):
    """Jets of the output at every point of ``t``, plus a cache for backward.

    Returns ``(u, du, ddu, cache)`` with 1D arrays of length ``len(t)``.
    """
    t = np.asarray(t, dtype=np.float64)
    h = t[None, :]
    dh = ddh = None  # input seed: dh = 1, ddh = 0
    cache = []
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = _matmul(W, h) + b[:, None]
        if dh is None:
            dz = np.ascontiguousarray(W[:, :1])
            ddz = np.zeros_like(dz)
        else:
            dz = _matmul(W, dh)
            ddz = _matmul(W, ddh)
        if not _activates(net, l):
            cache.append((h, dh, ddh, None, None, None, None, None))
            h, dh, ddh = z, dz, ddz
            continue
        if net.arch.activation is ActivationKind.SINLU:
            h_next, dh_next, ddh_next, a1, a2, a3 = _kernels.sinlu_jet(z, dz, ddz)
        else:
            h_next, a1, a2, a3 = activations.derivatives(net.arch.activation, z)
            dz, ddz = np.broadcast_to(dz, z.shape), np.broadcast_to(ddz, z.shape)
            dh_next, ddh_next = a1 * dz, a2 * dz * dz + a1 * ddz
        cache.append((h, dh, ddh, dz, ddz, a1, a2, a3))
        h, dh, ddh = h_next, dh_next, ddh_next
    return h[0], dh[0], ddh[0], cache


def backward_batch(net: GeometricNetwork, cache, g_u, g_du, g_ddu) -> list[np.ndarray]:
    """Parameter gradients given adjoints of the output jet components.

    Returns gradients in :meth:`GeometricNetwork.params` order, already
    multiplied by the masks.
    """
    gh = np.asarray(g_u, dtype=np.float64)[None, :]
    gdh = np.asarray(g_du, dtype=np.float64)[None, :]
    gddh = np.asarray(g_ddu, dtype=np.float64)[None, :]
    grads: list[np.ndarray] = [None] * (2 * net.arch.n_layers)
    for l in range(net.arch.n_layers - 1, -1, -1):
        h, dh, ddh, dz, ddz, a1, a2, a3 = cache[l]
        if a1 is not None:
            gz, gdz, gddz = _kernels.chain_backward(gh, gdh, gddh, dz, ddz, a1, a2, a3)
        else:
            gz, gdz, gddz = gh, gdh, gddh
        W = net.weights[l]
        if dh is None:
            gW = gz @ h.T + gdz.sum(axis=1, keepdims=True)
        else:
            gW = gz @ h.T + gdz @ dh.T + gddz @ ddh.T
        grads[2 * l] = gW * net.weight_mask[l]
        grads[2 * l + 1] = gz.sum(axis=1) * net.bias_mask[l]
        if l > 0:
            WT = W.T
            gh, gdh, gddh = _matmul(WT, gz), _matmul(WT, gdz), _matmul(WT, gddz)
    return grads


# ---------------------------------------------------------------- structure


def _check_hidden(net: GeometricNetwork, layer: int):
    if layer not in net.arch.hidden_layers:
        raise IndexError(f"layer {layer} is not a hidden layer of {net.arch.layer_sizes}")


def importance(net: GeometricNetwork, layer: int) -> np.ndarray:
    """Sum of absolute incoming and outgoing weights per unit of a hidden layer."""
    _check_hidden(net, layer)
    w_in = np.abs(net.weights[layer - 1]).sum(axis=1)
    w_out = np.abs(net.weights[layer]).sum(axis=0)
    return w_in + w_out


def swap(net: GeometricNetwork, layer: int, i: int, j: int) -> GeometricNetwork:
    """Exchange units ``i`` and ``j`` of a hidden layer in place.

    Coordinates belong to slots and stay put, so the unit moves in space
    while the network function is unchanged.
    """
    _check_hidden(net, layer)
    n = net.arch.layer_sizes[layer]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"unit index out of range for layer of {n}")
    if i == j:
        raise ValueError("cannot swap a unit with itself")
    p = [i, j]
    q = [j, i]
    for arr in (net.weights[layer - 1], net.weight_mask[layer - 1], net.biases[layer - 1], net.bias_mask[layer - 1]):
        arr[p] = arr[q]
    for arr in (net.weights[layer], net.weight_mask[layer]):
        arr[:, p] = arr[:, q]
    return net


def active_units(net: GeometricNetwork) -> list[np.ndarray]:
    """Per hidden layer, which units are active.

    A unit is active when it has a live nonzero outgoing weight and either a
    live nonzero incoming weight or a nonzero bias.
    """
    out = []
    for layer in net.arch.hidden_layers:
        w_in = (net.weights[layer - 1] != 0) & net.weight_mask[layer - 1]
        b = (net.biases[layer - 1] != 0) & net.bias_mask[layer - 1]
        w_out = (net.weights[layer] != 0) & net.weight_mask[layer]
        out.append(w_out.any(axis=0) & (w_in.any(axis=1) | b))
    return out


def prune_stats(net: GeometricNetwork) -> PruneStats:
    zeroed_w = sum(int(((W == 0) | ~m).sum()) for W, m in zip(net.weights, net.weight_mask))
    zeroed_b = sum(int(((b == 0) | ~m).sum()) for b, m in zip(net.biases, net.bias_mask))
    total = sum(W.size for W in net.weights)
    return PruneStats(zeroed_w, zeroed_b, [int(a.sum()) for a in active_units(net)], total)


def prune(net: GeometricNetwork, threshold: float = 1e-3) -> tuple[GeometricNetwork, PruneStats]:
    """Zero and permanently mask every parameter with ``|value| < threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    for p, m in zip(net.params(), net.masks()):
        m &= np.abs(p) >= threshold
        p[~m] = 0.0
    return net, prune_stats(net)


# ---------------------------------------------------------------- snapshots


def to_snapshot(net: GeometricNetwork, epoch: int | None = None) -> dict:
    return {
        "epoch": epoch,
        "layer_sizes": list(net.arch.layer_sizes),
        "activation": net.arch.activation.value,
        "final_activation": net.arch.final_activation,
        "A": net.arch.A,
        "coords": [c.tolist() for c in net.coords],
        "weights": [W.tolist() for W in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "mask": {
            "weights": [m.tolist() for m in net.weight_mask],
            "biases": [m.tolist() for m in net.bias_mask],
        },
    }


def from_snapshot(data: dict) -> GeometricNetwork:
    try:
        arch = Architecture(
            tuple(data["layer_sizes"]),
            data["activation"],
            bool(data.get("final_activation", False)),
            float(data["A"]),
        )
        return GeometricNetwork(
            arch,
            [np.array(W, dtype=np.float64).reshape(arch.layer_sizes[l + 1], arch.layer_sizes[l])
             for l, W in enumerate(data["weights"])],
            [np.array(b, dtype=np.float64) for b in data["biases"]],
            [np.array(m, dtype=bool).reshape(arch.layer_sizes[l + 1], arch.layer_sizes[l])
             for l, m in enumerate(data["mask"]["weights"])],
            [np.array(m, dtype=bool) for m in data["mask"]["biases"]],
            [np.array(c, dtype=np.float64).reshape(-1, 2) for c in data["coords"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed snapshot: {exc}") from exc


def save_snapshot(net: GeometricNetwork, path, epoch: int | None = None):
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(to_snapshot(net, epoch)))


def load_snapshot(path) -> GeometricNetwork:
    return from_snapshot(json.loads(Path(path).read_text()))
