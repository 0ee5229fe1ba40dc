"""Differential equations, collocation sets and closed-form solutions.

Two families are supported:

* ``poisson_harmonic``: ``x'' = sum_k c_k sin(k t)`` on ``[0, 2 pi]`` with
  ``x(0) = x(2 pi) = 0``.  The exact solution is
  ``x(t) = -sum_k (c_k / k^2) sin(k t)``.
* ``logistic``: ``x' = r x (1 - x)`` with ``x(t_lo) = x0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Jet, Scalar

POISSON = "poisson_harmonic"
LOGISTIC = "logistic"

# source of the four-harmonic benchmark: sin t + 4 sin 2t + 9 sin 3t + 16 sin 4t
HARMONIC_BENCHMARK = (1.0, 4.0, 9.0, 16.0)


@dataclass(frozen=True)
class ProblemSpec:
    kind: str = POISSON
    coefficients: tuple[float, ...] = HARMONIC_BENCHMARK
    rate: float = 1.0
    x0: float = 0.5
    domain: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (POISSON, LOGISTIC):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.domain is None:
            dom = (0.0, 2.0 * math.pi) if self.kind == POISSON else (0.0, 5.0)
            object.__setattr__(self, "domain", dom)
        else:
            object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"empty domain {self.domain}")

    @classmethod
    def poisson(cls, coefficients=HARMONIC_BENCHMARK, domain=None) -> "ProblemSpec":
        return cls(POISSON, tuple(coefficients), domain=domain)

    @classmethod
    def logistic(cls, rate=1.0, x0=0.5, domain=None) -> "ProblemSpec":
        return cls(LOGISTIC, (), rate=rate, x0=x0, domain=domain)

    @property
    def boundary_conditions(self) -> list[tuple[float, float]]:
        lo, hi = self.domain
        if self.kind == POISSON:
            return [(lo, 0.0), (hi, 0.0)]
        return [(lo, self.x0)]

    @property
    def name(self) -> str:
        if self.kind == LOGISTIC:
            return "logistic"
        terms = [f"{c:g}sin({k}t)" if k > 1 else f"{c:g}sin(t)"
                 for k, c in enumerate(self.coefficients, start=1) if c]
        return "+".join(terms) or "0"

    def source(self, t):
        """Right-hand side of the Poisson equation."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coefficients, start=1):
            if c:
                out = out + c * np.sin(k * t)
        return out


@dataclass
class CollocationSet:
    interior: np.ndarray
    boundary: list[np.ndarray]
    test: np.ndarray
    boundary_values: list[float] = field(default_factory=list)

    @property
    def boundary_points(self) -> np.ndarray:
        return np.concatenate(self.boundary) if self.boundary else np.empty(0)


@dataclass
class ErrorReport:
    mse: float
    euclidean: float

    def to_dict(self) -> dict:
        return {"mse": self.mse, "euclidean": self.euclidean}


def sample_collocation(
    spec: ProblemSpec,
    n_interior: int = 1000,
    n_boundary: int = 50,
    n_test: int = 100,
    seed: int = 0,
) -> CollocationSet:
    """Uniform random interior points, endpoint boundary points, uniform test grid."""
    if min(n_interior, n_boundary, n_test) < 1:
        raise ValueError("collocation counts must be positive")
    bcs = spec.boundary_conditions
    if n_boundary % len(bcs):
        raise ValueError(f"n_boundary={n_boundary} does not split evenly over {len(bcs)} endpoints")
    lo, hi = spec.domain
    rng = np.random.default_rng(seed)
    interior = rng.uniform(lo, hi, size=n_interior)
    # uniform() is half-open; reject the (practically impossible) left endpoint
    while np.any(interior <= lo):
        bad = interior <= lo
        interior[bad] = rng.uniform(lo, hi, size=int(bad.sum()))
    per_end = n_boundary // len(bcs)
    boundary = [np.full(per_end, t) for t, _ in bcs]
    return CollocationSet(interior, boundary, np.linspace(lo, hi, n_test), [v for _, v in bcs])


def residual(spec: ProblemSpec, jet: Jet, t: float) -> Scalar:
    if spec.kind == POISSON:
        return jet.ddu - float(spec.source(t))
    return jet.du - spec.rate * jet.u * (1.0 - jet.u)


def boundary_residual(spec: ProblemSpec, value: Scalar, which: int):
    return value - spec.boundary_conditions[which][1]


def analytic_solution(spec: ProblemSpec, t):
    t = np.asarray(t, dtype=np.float64)
    if spec.kind == POISSON:
        out = np.zeros_like(t)
        for k, c in enumerate(spec.coefficients, start=1):
            if c:
                out = out - (c / k**2) * np.sin(k * t)
        return out
    lo = spec.domain[0]
    e = np.exp(spec.rate * (t - lo))
    return spec.x0 * e / (1.0 - spec.x0 + spec.x0 * e)


def error_report(predicted, exact) -> ErrorReport:
    err = np.asarray(predicted) - np.asarray(exact)
    return ErrorReport(float(np.mean(err**2)), float(np.sqrt(np.sum(err**2))))


def test_error(net, spec: ProblemSpec, colloc: CollocationSet) -> ErrorReport:
    """MSE and l2 error of ``net`` against the exact solution on the test grid.

    ``net`` is anything with a ``predict(t)`` method or a GeometricNetwork.
    """
    from .network import GeometricNetwork, forward_value

    t = colloc.test
    pred = forward_value(net, t) if isinstance(net, GeometricNetwork) else net.predict(t)
    return error_report(pred, analytic_solution(spec, t))


test_error.__test__ = False
