"""Fixed-point operator for the reaction problem, monotone iteration and Rothe stepping."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import face_flux, operator_residual
from .errors import MonotonicityViolation, NoConvergence, PropertyViolation
from .grid import face_inner, gradient, integrate, l2_norm
from .reaction import f_field, shifted_source
from .solver import ORDER_TOL, SolverConfig, solve_auxiliary

log = logging.getLogger(__name__)

STEP_TOL = 1e-8
SANDWICH_TOL = 1e-6
STATE_TOL = 1e-5


@dataclass
class SteadyStateReport:
    U_min: np.ndarray
    U_max: np.ndarray
    iterations_min: int
    iterations_max: int
    monotone_ok: bool
    fixed_point_residual_min: float
    fixed_point_residual_max: float
    unique: bool
    history_min: list = field(default_factory=list)
    history_max: list = field(default_factory=list)


@dataclass
class RotheTrajectory:
    states: list
    tau: float
    steady: bool
    residuals: list
    history: list = field(default_factory=list)
    final_residual: float = float("nan")


def _solve_K(U, src, spec, p, config):
    g = shifted_source(src, U)
    return solve_auxiliary(g, spec, p, src.lambda0, config, V0=U)


def apply_K(U, src, spec, p=None, config=None):
    """Solution ``V`` of ``-div a(grad V) + lambda0 V = f(x, U) + lambda0 U``."""
    U = spec.grid.check(U, "U")
    return _solve_K(U, src, spec, p, config).V


def k_monotone_check(U1, U2, src, spec, p=None, config=None, tol=ORDER_TOL):
    if np.any(U1 > U2):
        raise ValueError("k_monotone_check needs U1 <= U2")
    K1 = apply_K(U1, src, spec, p, config)
    K2 = apply_K(U2, src, spec, p, config)
    worst = float((K2 - K1).min())
    if worst < -tol:
        raise PropertyViolation("K monotone", f"K(U2) - K(U1) = {worst:.3e}")
    return worst


def k_lipschitz_check(U1, U2, src, spec, p=None, config=None, tol=ORDER_TOL):
    """Return ``(lhs, rhs)`` of the L2 Lipschitz bound with constant ``1 + gamma/lambda0``."""
    grid = spec.grid
    K1 = apply_K(U1, src, spec, p, config)
    K2 = apply_K(U2, src, spec, p, config)
    lhs = l2_norm(K2 - K1, grid)
    rhs = (1.0 + src.gamma / src.lambda0) * l2_norm(np.asarray(U2) - np.asarray(U1), grid)
    if lhs > rhs + tol:
        raise PropertyViolation("K lipschitz", f"{lhs:.6e} > {rhs:.6e}")
    return lhs, rhs


def iterate_K(U0, src, spec, p=None, config=None, iter_tol=1e-6, max_outer=500, direction=0):
    """Picard iteration ``U <- K(U)`` until the max-norm update is below ``iter_tol``.

    ``direction`` of -1 (+1) requires a non-increasing (non-decreasing)
    sequence: a step breaking the order by more than ``ORDER_TOL`` raises,
    smaller breaks beyond ``STEP_TOL`` only clear the returned flag.
    Returns ``(U, iterations, monotone_ok, history)`` with history rows
    ``(step, delta_max, energy)``.
    """
    U = spec.grid.check(U0, "U0").copy()
    ok = True
    history = []
    for n in range(1, max_outer + 1):
        rep = _solve_K(U, src, spec, p, config)
        step = rep.V - U
        delta = float(np.max(np.abs(step)))
        history.append((n, delta, rep.energy_final))
        if direction:
            worst = float(np.max(direction * -step))
            if worst > ORDER_TOL:
                raise MonotonicityViolation("monotone iteration", f"step {n} breaks order by {worst:.3e}")
            if worst > STEP_TOL:
                ok = False
        U = rep.V
        if delta <= iter_tol:
            return U, n, ok, history
    raise NoConvergence(max_outer, delta, "outer iteration did not settle")


def fixed_point_residual(U, src, spec, p=None, config=None):
    return float(np.max(np.abs(apply_K(U, src, spec, p, config) - U)))


def minimal_maximal_solutions(src, spec, p=None, config=None, iter_tol=1e-6, max_outer=500):
    """Monotone iterations from the constant sub- and supersolutions 0 and 1.

    The two iterations are independent; they run one after the other.
    """
    config = config or SolverConfig()
    shape = spec.grid.shape
    lo, n_lo, ok_lo, h_lo = iterate_K(np.zeros(shape), src, spec, p, config, iter_tol, max_outer, +1)
    hi, n_hi, ok_hi, h_hi = iterate_K(np.ones(shape), src, spec, p, config, iter_tol, max_outer, -1)
    res_lo = fixed_point_residual(lo, src, spec, p, config)
    res_hi = fixed_point_residual(hi, src, spec, p, config)
    unique = float(np.max(np.abs(hi - lo))) <= 10.0 * iter_tol
    return SteadyStateReport(lo, hi, n_lo, n_hi, ok_lo and ok_hi, res_lo, res_hi, unique, h_lo, h_hi)


def solution_sandwich_check(U_fixed, report, tol=SANDWICH_TOL):
    below = float(np.max(report.U_min - U_fixed))
    above = float(np.max(U_fixed - report.U_max))
    if below > tol or above > tol:
        raise PropertyViolation("sandwich", f"outside [U_min, U_max] by {max(below, above):.3e}")
    return max(below, above)


def cross_identity_check(U, U_tilde, src, spec, p=None, model="cell"):
    """Defect of the identity pairing two steady states against each other.

    Tests the weak form of ``U_tilde`` with ``U`` and vice versa; for exact
    fixed points the flux and reaction cross terms cancel.
    """
    grid = spec.grid
    lhs = face_inner(face_flux(U_tilde, spec, model), gradient(U, grid), grid) - face_inner(
        face_flux(U, spec, model), gradient(U_tilde, grid), grid
    )
    rhs = integrate(f_field(src, U_tilde) * U - f_field(src, U) * U_tilde, grid)
    return abs(lhs - rhs)


def rothe_step(u_k, tau, src, spec, p=None, config=None):
    """One implicit Euler step with explicit reaction, shifted by ``lambda0 u_k``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    u_k = spec.grid.check(u_k, "u_k")
    lam = src.lambda0 + 1.0 / tau
    uc = np.clip(u_k, 0.0, 1.0)
    g = f_field(src, uc) + src.lambda0 * uc + uc / tau
    return solve_auxiliary(g, spec, p, lam, config, V0=u_k)


def evolve(u0, tau, src, spec, p=None, config=None, max_steps=500, steady_tol=1e-6):
    """Rothe time stepping until ``max|u_{k+1} - u_k| <= steady_tol * tau``."""
    u = spec.grid.check(u0, "u0").copy()
    if float(u.min()) < -STATE_TOL or float(u.max()) > 1.0 + STATE_TOL:
        raise ValueError("u0 must lie in [0, 1]")
    states = [u]
    residuals = []
    history = []
    steady = False
    for k in range(1, max_steps + 1):
        rep = rothe_step(u, tau, src, spec, p, config)
        if rep.box_violation > STATE_TOL:
            raise NoConvergence(k, rep.box_violation, "Rothe state left [0, 1]")
        delta = float(np.max(np.abs(rep.V - u)))
        u = rep.V
        states.append(u)
        residuals.append(delta)
        history.append((k, delta, rep.energy_final))
        if delta <= steady_tol * tau:
            steady = True
            break
    model = (config or SolverConfig()).gradient_model
    uc = np.clip(u, 0.0, 1.0)
    final = operator_residual(uc, shifted_source(src, uc), spec, p, src.lambda0, 0.0, model)
    return RotheTrajectory(states, tau, steady, residuals, history, final)
