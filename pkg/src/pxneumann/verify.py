"""Property corpus run by the ``verify`` subcommand."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import energy, energy_gradient
from .errors import PxNeumannError
from .exponent import build_exponent_field
from .modular import modular_property_suite
from .solver import comparison_check, epsilon_continuation, minimum_principle_check, solve_auxiliary
from .steady import minimal_maximal_solutions, solution_sandwich_check

log = logging.getLogger(__name__)


@dataclass
class VerifyReport:
    results: list = field(default_factory=list)  # (name, passed, detail)

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.results)

    def add(self, name, ok, detail=""):
        self.results.append((name, bool(ok), detail))
        log.info("%s %s %s", "PASS" if ok else "FAIL", name, detail)


def directional_fd_error(V, g, spec, p, lam, eps, direction, h=1e-6, model="cell"):
    """Relative error between a central difference of the energy and ``<grad, direction>``."""
    Jp = energy(V + h * direction, g, spec, p, lam, eps, model)
    Jm = energy(V - h * direction, g, spec, p, lam, eps, model)
    fd = (Jp - Jm) / (2.0 * h)
    an = float(np.sum(energy_gradient(V, g, spec, p, lam, eps, model) * direction))
    return abs(fd - an) / max(abs(an), 1e-300)


def _guard(report, name, fn):
    try:
        ok, detail = fn()
    except PxNeumannError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    report.add(name, ok, detail)


def run_corpus(cfg, rng=None, n_fields=10, n_solves=3):
    """Modular suite, gradient check, principles, sandwich and monotone iteration on ``cfg``."""
    rng = cfg.rng() if rng is None else rng
    grid = cfg.grid
    spec = cfg.phase_spec()
    solver = cfg.solver
    model = solver.gradient_model
    lam = float(cfg.run.get("lambda", 1.0))
    report = VerifyReport()

    def modular_items():
        bad = []
        for _ in range(n_fields):
            p = build_exponent_field(rng.uniform(1.2, 4.0, grid.shape), grid)
            u = rng.standard_normal(grid.shape) * rng.uniform(0.1, 10.0)
            rep = modular_property_suite(u, p, raise_on_failure=False)
            bad += rep.failures()
        return not bad, f"{n_fields} fields" + (f", failing items {sorted(set(bad))}" if bad else "")

    def gradient_fd():
        worst = 0.0
        for _ in range(n_solves):
            V = rng.uniform(-0.5, 1.5, grid.shape)
            g = rng.uniform(0.0, lam, grid.shape)
            d = rng.standard_normal(grid.shape)
            worst = max(worst, directional_fd_error(V, g, spec, spec.p_max, lam, 1e-2, d, model=model))
        return worst < 1e-5, f"max relative error {worst:.2e}"

    def box_and_minimum():
        worst_box, worst_min = 0.0, np.inf
        for _ in range(n_solves):
            g = rng.uniform(0.0, lam, grid.shape)
            rep = solve_auxiliary(g, spec, None, lam, solver)
            worst_box = max(worst_box, rep.box_violation)
            v = minimum_principle_check(spec, None, lam, rep.V, g, model=model)
            worst_min = min(worst_min, v.worst)
        return worst_box <= 1e-6, f"box violation {worst_box:.2e}, min V {worst_min:.3e}"

    def comparison():
        worst = np.inf
        for _ in range(n_solves):
            g1 = rng.uniform(0.0, lam, grid.shape)
            g2 = np.minimum(lam, g1 + rng.uniform(0.0, 0.3 * lam, grid.shape))
            worst = min(worst, comparison_check(g1, g2, spec, None, lam, solver).worst)
        return True, f"min V2 - V1 = {worst:.3e}"

    def sandwich():
        g = rng.uniform(0.0, lam, grid.shape)
        rep = epsilon_continuation(g, spec, None, lam, solver)
        return rep.sandwich.bound_ok, f"m_box {rep.sandwich.m_box:.6g}"

    def monotone():
        src = cfg.reaction_source()
        rep = minimal_maximal_solutions(src, spec, None, solver)
        lo = solution_sandwich_check(rep.U_min, rep)
        hi = solution_sandwich_check(rep.U_max, rep)
        ok = rep.monotone_ok and max(rep.fixed_point_residual_min, rep.fixed_point_residual_max) <= 1e-5
        return ok, (
            f"iterations {rep.iterations_min}/{rep.iterations_max}, residuals "
            f"{rep.fixed_point_residual_min:.2e}/{rep.fixed_point_residual_max:.2e}, sandwich {max(lo, hi):.1e}"
        )

    _guard(report, "modular", modular_items)
    _guard(report, "gradient", gradient_fd)
    _guard(report, "box+minimum", box_and_minimum)
    _guard(report, "comparison", comparison)
    _guard(report, "sandwich", sandwich)
    _guard(report, "monotone", monotone)
    return report
