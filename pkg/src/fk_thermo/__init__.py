"""Numerics on the circle for weighted heat semigroups and Gibbs diffusions.

The package computes principal eigenpairs of f -> f''/2 + V f on periodic
grids, propagates the associated weighted heat semigroup by Crank-Nicolson
and by Monte-Carlo path integration, simulates the normalized (Doob) Gibbs
diffusion, and evaluates relative entropy, pressure and the variational
principle pressure == principal eigenvalue, with independent numerical
routes cross-checking every identity.
"""

__version__ = "0.1.0"

from .grid import (GridFunction, HarmonicSpec, PeriodicGrid, derivative,
                   function_from_csv, integrate, make_grid)
from .spectral import (DegenerateGap, EigenSolution, OperatorMatrix,
                       PositivityViolation, build_generator,
                       critical_point_count, eigen_probability, gibbs_density,
                       principal_eigenpair)
from .feynman_kac import (PropagatorConfig, check_selfadjoint, propagate_mc,
                          propagate_pde)
from .mc import McConfig, PathEnsemble, simulate_paths
from .gibbs import (RnWeight, generator_apply, invariance_residual,
                    normalized_semigroup, rn_weight, rn_weight_admissible,
                    rn_weights, rn_weights_admissible, simulate_sde,
                    tv_distance)
from .thermo import (AdmissibleDrift, EntropyMismatch, EntropyReport,
                     MaximizeResult, NonConvergence, admissible_from_eigen,
                     admissible_from_spec, admissible_from_values,
                     carre_du_champ, entropy_finite_T_mc, make_entropy_report,
                     maximize_pressure, pressure_gap, pressure_value,
                     relative_entropy)

__all__ = [
    "GridFunction", "HarmonicSpec", "PeriodicGrid", "derivative",
    "function_from_csv", "integrate", "make_grid",
    "DegenerateGap", "EigenSolution", "OperatorMatrix", "PositivityViolation",
    "build_generator", "critical_point_count", "eigen_probability",
    "gibbs_density", "principal_eigenpair",
    "PropagatorConfig", "check_selfadjoint", "propagate_mc", "propagate_pde",
    "McConfig", "PathEnsemble", "simulate_paths",
    "RnWeight", "generator_apply", "invariance_residual",
    "normalized_semigroup", "rn_weight", "rn_weight_admissible", "rn_weights",
    "rn_weights_admissible", "simulate_sde", "tv_distance",
    "AdmissibleDrift", "EntropyMismatch", "EntropyReport", "MaximizeResult",
    "NonConvergence", "admissible_from_eigen", "admissible_from_spec",
    "admissible_from_values", "carre_du_champ", "entropy_finite_T_mc",
    "make_entropy_report", "maximize_pressure", "pressure_gap",
    "pressure_value", "relative_entropy",
]
