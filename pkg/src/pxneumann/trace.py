"""CSV traces of solver and time-stepping histories."""
import numpy as np

SOLVER_HEADER = "iter,energy,grad_residual"
STEP_HEADER = "step,delta_max,energy"


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def emit_trace(report, path, kind=None):
    """Write a report's history as CSV.

    ``report`` may be a SolveReport, RotheTrajectory, SteadyStateReport
    (iteration from 1 only), or a bare list of rows with ``kind`` given as
    ``"solver"`` or ``"step"``.
    """
    if isinstance(report, list):
        rows = report
        if kind not in ("solver", "step"):
            raise ValueError("kind must be 'solver' or 'step' for a bare history")
    elif hasattr(report, "grad_residual"):
        rows, kind = report.history, "solver"
    elif hasattr(report, "history_max"):
        rows, kind = report.history_max, "step"
    else:
        rows, kind = report.history, "step"
    header = SOLVER_HEADER if kind == "solver" else STEP_HEADER
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
