"""Generalized symbolic regression: find g(y) = f(x) as sums of encoded basis functions."""

from .admm import AdmmConfig, FitResult, refit_support, soft_threshold, solve_admm
from .benchmarks import get_benchmark, library_for, list_benchmarks, sample_dataset
from .encoding import BasisPhi, BasisPsi, MappingTable, Transform, decode_phi, decode_psi
from .evaluate import Dataset, build_design, eval_phi, eval_psi
from .expression import format_relation, parse_relation
from .gp import GpConfig, run
from .recovery import RecoveredModel, equivalence_check, predict_y, prediction_rmse

__all__ = [
    "AdmmConfig", "FitResult", "refit_support", "soft_threshold", "solve_admm",
    "get_benchmark", "library_for", "list_benchmarks", "sample_dataset",
    "BasisPhi", "BasisPsi", "MappingTable", "Transform", "decode_phi", "decode_psi",
    "Dataset", "build_design", "eval_phi", "eval_psi",
    "format_relation", "parse_relation",
    "GpConfig", "run",
    "RecoveredModel", "equivalence_check", "predict_y", "prediction_rmse",
]
