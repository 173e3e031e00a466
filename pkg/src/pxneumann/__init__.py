"""Variable-exponent multiphase Neumann problems on cell-centred grids.

Discrete energies, a convex minimiser for the auxiliary problem, monotone
iteration for steady states of the reaction problem, Rothe time stepping,
and the modular/norm toolkit of variable-exponent spaces.
"""
from .config import RunConfig, parse_config
from .energy import energy, energy_and_gradient, energy_gradient, face_flux, operator_residual
from .errors import *  # noqa: F401,F403
from .exponent import ExponentField, build_exponent_field, conjugate_exponent, log_holder_estimate, sobolev_critical
from .grid import Grid, VectorField, divergence, gradient, integrate
from .modular import luxemburg_norm, modular, modular_property_suite
from .pgm import ImageBuffer, load_pgm, save_pgm
from .phases import PhaseSpec, build_phase_spec, single_phase
from .reaction import ReactionSource, build_reaction_source, hypothesis_audit, shifted_source
from .solver import (
    SolverConfig,
    SolveReport,
    comparison_check,
    epsilon_continuation,
    gamma_convergence_check,
    minimize,
    minimum_principle_check,
    solve_auxiliary,
)
from .steady import (
    apply_K,
    cross_identity_check,
    evolve,
    k_lipschitz_check,
    k_monotone_check,
    minimal_maximal_solutions,
    rothe_step,
    solution_sandwich_check,
)
from .trace import emit_trace

__version__ = "0.1.0"
