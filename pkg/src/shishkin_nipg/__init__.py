"""NIPG discontinuous Galerkin solver for singularly perturbed convection-diffusion
problems on Shishkin meshes, with special interpolants, post-processing and
convergence diagnostics."""

from .dgspace import DGFunction
from .experiment import ConvergenceTable, ExperimentConfig, emit_csv, read_csv, run_single, run_sweep
from .interpolation import interpolate, interpolate_lobatto, interpolate_pi, project_gauss_radau
from .mesh import build_macro, build_shishkin
from .norms import discrete_nipg_norm, error_norm, macro_error_norm, nipg_norm
from .postprocess import apply_R
from .problem import Problem, get_problem, paper_test_problem
from .solver import assemble, penalty_schedule, scheme_a, scheme_b, solve

__version__ = "0.1.0"

__all__ = [
    "ConvergenceTable", "DGFunction", "ExperimentConfig", "Problem",
    "apply_R", "assemble", "build_macro", "build_shishkin", "discrete_nipg_norm",
    "emit_csv", "error_norm", "get_problem", "interpolate", "interpolate_lobatto",
    "interpolate_pi", "macro_error_norm", "nipg_norm", "paper_test_problem",
    "penalty_schedule", "project_gauss_radau", "read_csv", "run_single", "run_sweep",
    "scheme_a", "scheme_b", "solve",
]
