"""Strictly convex minimisation of the discrete energy, and checks built on it."""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import MODELS, energy, energy_and_gradient, face_coefficients, operator_residual
from .grid import difference_matrix
from .errors import MembershipError, NoConvergence, PrincipleViolation, PropertyViolation, SandwichViolation

log = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-12
ORDER_TOL = 1e-7


@dataclass(frozen=True)
class SolverConfig:
    grad_tol: float = 1e-9
    max_iters: int = 20000
    armijo_c: float = 1e-4
    step_init: float = 1.0
    epsilon_schedule: tuple = (1e-2, 1e-3, 1e-4, 0.0)
    gradient_model: str = "cell"
    metric: str = "sobolev"
    metric_refresh: int = 1
    step_min: float = 1e-4
    step_max: float = 1e2
    stall_iters: int = 30
    error_tol: float = 1e-8
    use_numba: bool = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not self.step_init > 0:
            raise ValueError("step_init must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        sched = tuple(float(e) for e in self.epsilon_schedule)
        if not sched or sched[-1] != 0.0 or any(e < 0 for e in sched):
            raise ValueError("epsilon_schedule must be non-negative and end with 0")
        if any(b > a for a, b in zip(sched, sched[1:])):
            raise ValueError("epsilon_schedule must be non-increasing")
        object.__setattr__(self, "epsilon_schedule", sched)
        if self.metric not in ("sobolev", "euclidean"):
            raise ValueError("metric must be 'sobolev' or 'euclidean'")
        if self.stall_iters < 1:
            raise ValueError("stall_iters must be positive")
        if self.metric_refresh < 1:
            raise ValueError("metric_refresh must be positive")
        if self.gradient_model not in MODELS:
            raise ValueError(f"gradient_model must be one of {MODELS}")


@dataclass
class SandwichData:
    m_box: float
    eps: list
    mins_per_eps: list
    upper_bounds: list
    bound_ok: bool


@dataclass
class SolveReport:
    V: np.ndarray
    energy_final: float
    grad_residual: float
    iters: int
    box_violation: float
    history: list = field(default_factory=list)
    sandwich: SandwichData = None
    stop_reason: str = "gradient"
    error_estimate: float = float("nan")


def box_violation(V, upper=1.0):
    return float(max(0.0, -float(np.min(V)), float(np.max(V)) - upper))


def _metric(V, spec, p, lam, eps, model):
    """Frozen-coefficient energy metric ``D^T K D + diag(lam + eps |V|^(p-2))``.

    ``K`` holds the secant flux coefficients at ``V``; descent in this metric
    is a Sobolev-gradient step and removes the grid-dependent stiffness.
    """
    grid = spec.grid
    D = difference_matrix(grid)
    kx, ky = face_coefficients(V, spec, model, s_floor=1e-12)
    k = np.concatenate([kx.ravel(), ky.ravel()])
    k = np.maximum(k, 1e-12 * max(1.0, float(k.max(initial=0.0))))
    diag = np.broadcast_to(np.asarray(lam, dtype=float), grid.shape).ravel().copy()
    if eps:
        pe = (spec.p_max if p is None else p).values.ravel()
        diag += eps * np.maximum(np.abs(V.ravel()), 1e-8) ** (pe - 2.0)
    return (D.T @ sp.diags(k) @ D + sp.diags(diag)).tocsc()


def minimize(g, spec, p=None, lam=1.0, eps=0.0, V0=None, config=None):
    """Gradient descent with Barzilai-Borwein step lengths and Armijo backtracking.

    With ``config.metric == "sobolev"`` (default) the descent direction is
    the gradient taken in the frozen-coefficient energy metric, refreshed
    every ``metric_refresh`` iterations, and the BB step is measured in the
    same metric.  ``"euclidean"`` uses the plain gradient per unit measure.
    Energies along the iterates never increase beyond a round-off allowance.

    The stopping test is on the gradient per unit measure.  Phases with
    exponent below 2 have a flux with unbounded slope at zero gradient, so
    near flat patches one ulp in ``V`` can move that gradient well above
    ``grad_tol``.  When the residual stops improving for ``stall_iters``
    iterations the metric run falls back on the Newton-decrement bound
    ``max|V - V*| <= sqrt(G^T M^-1 G / (c m lam_min))`` (``c`` accounts for
    the secant metric overshooting the Hessian) and accepts ``V`` with
    ``stop_reason = "roundoff"`` if that bound is below ``error_tol``.
    """
    config = config or SolverConfig()
    grid = spec.grid
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0) or not np.any(lam_arr > 0):
        raise ValueError("lam must be non-negative and not identically zero")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    m = grid.cell_measure
    V = np.zeros(grid.shape) if V0 is None else grid.check(V0, "V0").copy()
    sobolev = config.metric == "sobolev"
    lam_min = float(lam_arr.min())
    p_low = min(float(np.min(P)) for P in spec.arrays()[1])
    curv = m * lam_min * min(1.0, p_low - 1.0)
    est = float("inf")

    def fg(u):
        return energy_and_gradient(u, g, spec, p, lam, eps, config.gradient_model, config.use_numba)

    E, G = fg(V)
    G = G / m
    res = float(np.max(np.abs(G)))
    history = []
    step = config.step_init
    M = lu = None
    it = 0
    best, it_best = res, 0
    while res > config.grad_tol and it < config.max_iters:
        if sobolev:
            if it % config.metric_refresh == 0:
                M = _metric(V, spec, p, lam, eps, config.gradient_model)
                lu = spla.splu(M)
            d = -lu.solve(G.ravel()).reshape(grid.shape)
        else:
            d = -G
        slope = float(np.sum(G * d)) * m
        if sobolev and curv > 0:
            est = float(np.sqrt(max(-slope, 0.0) / curv))
        t = step
        for _ in range(80):
            Vn = V + t * d
            En, Gn = fg(Vn)
            if En <= E + config.armijo_c * t * slope + 1e-14 * max(1.0, abs(E)):
                break
            t *= 0.5
        else:
            log.debug("line search stalled at iteration %d (residual %.3e)", it, res)
            if est <= config.error_tol:
                return SolveReport(V, E, res, it, box_violation(V), history, None, "roundoff", est)
            break
        Gn = Gn / m
        s = Vn - V
        y = Gn - G
        sy = float(np.sum(s * y))
        if sy > 0:
            if sobolev:
                sv = s.ravel()
                step = float(sv @ (M @ sv)) / sy
            elif it % 2 == 0:
                step = float(np.sum(s * s)) / sy
            else:
                step = sy / float(np.sum(y * y))
            step = min(max(step, config.step_min), config.step_max)
        else:
            step = config.step_init
        V, E, G = Vn, En, Gn
        res = float(np.max(np.abs(G)))
        it += 1
        history.append((it, E, res))
        if res < 0.9 * best:
            best, it_best = res, it
        elif sobolev and it - it_best >= config.stall_iters:
            if est <= config.error_tol:
                return SolveReport(V, E, res, it, box_violation(V), history, None, "roundoff", est)
            raise NoConvergence(it, res, f"residual stalled near {best:.3e} (error bound {est:.3e})")
    if res > config.grad_tol:
        raise NoConvergence(it, res)
    return SolveReport(V, E, res, it, box_violation(V), history, None, "gradient")


def check_membership(g, lam):
    g = np.asarray(g, dtype=float)
    tol = MEMBERSHIP_TOL * max(1.0, lam)
    if float(g.min()) < -tol or float(g.max()) > lam + tol:
        raise MembershipError(f"source range [{g.min():.6g}, {g.max():.6g}] is not inside [0, {lam:g}]")


def solve_auxiliary(g, spec, p=None, lam=1.0, config=None, V0=None):
    """Unique solution of ``-div a(grad V) + lam V = g`` with Neumann data, ``g`` in ``[0, lam]``.

    No projection is applied; ``box_violation`` reports how far ``V`` leaves [0, 1].
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    g = spec.grid.check(g, "g")
    check_membership(g, lam)
    if V0 is None:
        V0 = g / lam
    return minimize(g, spec, p, lam, 0.0, V0, config)


def epsilon_continuation(g, spec, p=None, lam=1.0, config=None, V0=None, tol=1e-8):
    """Warm-started solves along the epsilon schedule with the energy sandwich check.

    With ``m_box`` the energy of the final (eps = 0) minimiser, every
    schedule entry must satisfy
    ``m_box <= min J_eps <= m_box + eps |Omega| / p_minus`` (up to ``tol``).
    """
    config = config or SolverConfig()
    grid = spec.grid
    g = grid.check(g, "g")
    check_membership(g, lam)
    pfield = spec.p_max if p is None else p
    V = g / lam if V0 is None else V0
    reports = []
    for eps in config.epsilon_schedule:
        rep = minimize(g, spec, pfield, lam, eps, V, config)
        reports.append(rep)
        V = rep.V
    final = reports[-1]
    m_box = final.energy_final
    mins = [r.energy_final for r in reports]
    uppers = [m_box + e * grid.measure / pfield.p_minus for e in config.epsilon_schedule]
    ok = True
    for e, j, up in zip(config.epsilon_schedule, mins, uppers):
        if not (m_box - tol <= j <= up + tol):
            ok = False
            raise SandwichViolation(e, f"min J = {j!r} outside [{m_box!r}, {up!r}]")
    final.sandwich = SandwichData(m_box, list(config.epsilon_schedule), mins, uppers, ok)
    return final


@dataclass
class GammaReport:
    gaps: list
    passed: bool


def gamma_convergence_check(V_seq, eps_seq, g, spec, p, lam, V_limit, tol=1e-10, model="cell"):
    """Gaps ``|J_{lam,eps_n}(V_n) - J_lam(V)|`` must decrease (up to ``tol``)."""
    target = energy(V_limit, g, spec, p, lam, 0.0, model)
    gaps = [abs(energy(Vn, g, spec, p, lam, en, model) - target) for Vn, en in zip(V_seq, eps_seq)]
    for k in range(1, len(gaps)):
        if gaps[k] > gaps[k - 1] + tol:
            raise PropertyViolation("gamma", f"gap increased at n={k}: {gaps[k - 1]!r} -> {gaps[k]!r}")
    return GammaReport(gaps, True)


@dataclass
class Verdict:
    passed: bool
    case: str
    worst: float
    cell: tuple = None
    solutions: tuple = None


def minimum_principle_check(spec, p, c, u, rhs, tol=ORDER_TOL, residual_tol=1e-6, model="cell"):
    """Classify a solve of ``-div a(grad u) + c u = rhs`` with ``rhs >= 0``.

    Case (1): ``u >= -tol``; case (2): ``u`` a negative constant and
    ``c == 0``.  Anything else raises :class:`PrincipleViolation`.
    """
    grid = spec.grid
    u = grid.check(u, "u")
    c = np.broadcast_to(np.asarray(c, dtype=float), grid.shape)
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), grid.shape)
    if np.any(c < 0):
        raise ValueError("c must be non-negative")
    if np.any(rhs < 0):
        raise ValueError("rhs certificate must be non-negative")
    res = operator_residual(u, rhs, spec, p, c, 0.0, model)
    if res > residual_tol:
        raise ValueError(f"u is not a solution (residual {res:.3e})")
    umin = float(u.min())
    if umin >= -tol:
        return Verdict(True, "nonnegative", umin)
    if np.ptp(u) <= tol and not np.any(c):
        return Verdict(True, "negative-constant", umin)
    cell = np.unravel_index(int(np.argmin(u)), grid.shape)
    raise PrincipleViolation("minimum principle", f"u = {umin:.3e} at {cell}", cell)


def comparison_check(g1, g2, spec, p=None, lam=1.0, config=None, tol=ORDER_TOL):
    """Solve with ``g1 <= g2`` and assert the solutions are ordered."""
    g1 = spec.grid.check(g1, "g1")
    g2 = spec.grid.check(g2, "g2")
    if np.any(g2 < g1):
        raise ValueError("comparison_check needs g1 <= g2")
    r1 = solve_auxiliary(g1, spec, p, lam, config)
    r2 = solve_auxiliary(g2, spec, p, lam, config)
    diff = r2.V - r1.V
    worst = float(diff.min())
    if worst < -tol:
        cell = np.unravel_index(int(np.argmin(diff)), spec.grid.shape)
        raise PrincipleViolation("comparison", f"V2 - V1 = {worst:.3e} at {cell}", cell)
    return Verdict(True, "ordered", worst, solutions=(r1, r2))
