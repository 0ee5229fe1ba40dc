"""Physics-informed networks trained with locality-weighted sparsification.

The public entry points are re-exported here; see the submodules for the
lower-level pieces (scalar tape, jets, swaps, modular composition).
"""

from .activations import ActivationKind
from .config import RunConfig
from .modular import ModularNetwork, ModuleTemplate, build_modular, extract_template, train_modular
from .network import Architecture, GeometricNetwork, init_xavier, load_snapshot, prune, save_snapshot
from .problems import ProblemSpec, analytic_solution, sample_collocation
from .trainer import RunRecord, TrainConfig, TrainingDiverged, fit, train

__all__ = [
    "ActivationKind",
    "Architecture",
    "GeometricNetwork",
    "ModularNetwork",
    "ModuleTemplate",
    "ProblemSpec",
    "RunConfig",
    "RunRecord",
    "TrainConfig",
    "TrainingDiverged",
    "analytic_solution",
    "build_modular",
    "extract_template",
    "fit",
    "init_xavier",
    "load_snapshot",
    "prune",
    "sample_collocation",
    "save_snapshot",
    "train",
    "train_modular",
]
