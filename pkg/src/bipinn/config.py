"""Flat run configuration shared by the CLI and the experiment presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .bimt import PhaseSchedule, RegularizerConfig
from .network import Architecture
from .problems import HARMONIC_BENCHMARK, LOGISTIC, POISSON, ProblemSpec
from .trainer import TrainConfig


@dataclass
class RunConfig:
    # problem
    problem: str = POISSON
    coefficients: list[float] = field(default_factory=lambda: list(HARMONIC_BENCHMARK))
    rate: float = 1.0
    x0: float = 0.5
    domain: list[float] | None = None
    n_interior: int = 1000
    n_boundary: int = 50
    n_test: int = 100
    # architecture
    layer_sizes: list[int] = field(default_factory=lambda: [1, 21, 1])
    activation: str = "sinlu"
    final_activation: bool = False
    bias_init: float = 0.01
    # optimisation
    epochs: int = 100_000
    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    seed: int = 0
    # brain-inspired training
    bimt_enabled: bool = True
    lambda_phase1: float = 0.001
    lambda_phase2: float = 0.01
    lambda_phase3: float = 0.001
    bias_penalty_in_phase3: bool = True
    weight_penalty_in_phase3: bool = True
    A: float = 2.0
    swap_interval: int = 200
    prune_threshold: float = 1e-3
    # output
    metrics_every: int = 1000
    snapshot_every: int = 0
    output_dir: str = "runs/default"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def set(self, key: str, raw: str) -> "RunConfig":
        """Override one field from a ``key=value`` string, parsing JSON where possible."""
        types = {f.name: f for f in fields(self)}
        if key not in types:
            raise ValueError(f"unknown config key {key!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        current = getattr(self, key)
        if isinstance(current, bool) and isinstance(value, str):
            value = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        setattr(self, key, value)
        self.validate()
        return self

    def validate(self):
        # building the typed objects runs their own checks
        self.problem_spec()
        self.architecture()
        self.train_config()

    def problem_spec(self) -> ProblemSpec:
        dom = tuple(self.domain) if self.domain is not None else None
        if self.problem == LOGISTIC:
            return ProblemSpec.logistic(self.rate, self.x0, dom)
        if self.problem == POISSON:
            return ProblemSpec.poisson(self.coefficients, dom)
        raise ValueError(f"unknown problem {self.problem!r}")

    def architecture(self) -> Architecture:
        return Architecture(tuple(self.layer_sizes), self.activation, self.final_activation, self.A)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            betas=(self.beta1, self.beta2),
            eps=self.eps,
            weight_decay=self.weight_decay,
            seed=self.seed,
            bimt_enabled=self.bimt_enabled,
            schedule=PhaseSchedule(
                self.epochs,
                self.lambda_phase1,
                self.lambda_phase2,
                self.lambda_phase3,
                self.bias_penalty_in_phase3,
                self.weight_penalty_in_phase3,
            ),
            reg=RegularizerConfig(self.A, self.swap_interval),
            prune_threshold=self.prune_threshold,
            metrics_every=self.metrics_every,
            snapshot_every=self.snapshot_every,
            n_interior=self.n_interior,
            n_boundary=self.n_boundary,
            n_test=self.n_test,
            bias_init=self.bias_init,
        )
