"""Command line entry point: ``pxneumann {solve-aux,denoise,steady-states,verify,norm}``."""
import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .config import default_config, parse_config, profile
from .errors import PxNeumannError
from .exponent import build_exponent_field
from .modular import luxemburg_norm, modular_property_suite
from .pgm import ImageBuffer, load_pgm, save_pgm
from .solver import epsilon_continuation, solve_auxiliary
from .steady import evolve, minimal_maximal_solutions
from .trace import emit_trace
from .verify import run_corpus


def _grid_arg(text):
    try:
        parts = [int(x) for x in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 32x32, got {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"grid must look like 32x32, got {text!r}")
    return tuple(parts)


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--seed", type=int, help="seed for every random draw (overrides run.seed)")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="pxneumann", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-aux", parents=[common], help="solve the auxiliary problem for one source")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--eps-schedule", type=_floats, help='e.g. "1e-1 1e-2 1e-3 0"')
    p.add_argument("--grid", type=_grid_arg, help="NXxNY")
    p.add_argument("--source-image", help="PGM whose pixels times lambda give the source")
    p.add_argument("--trace", help="CSV of iter, energy, grad_residual")

    p = sub.add_parser("denoise", parents=[common], help="Rothe time stepping from an image")
    p.add_argument("--tau", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--input", help="input PGM (default: synthetic two-region image)")
    p.add_argument("--output", help="output PGM (default: OUT/denoised.pgm)")
    p.add_argument("--trace", help="CSV of step, delta_max, energy")

    p = sub.add_parser("steady-states", parents=[common], help="minimal and maximal steady states")
    p.add_argument("--grid", type=_grid_arg, help="NXxNY")

    p = sub.add_parser("verify", parents=[common], help="run the property corpus")
    p.add_argument("--grid", type=_grid_arg, help="NXxNY")

    p = sub.add_parser("norm", parents=[common], help="modular, norm and property suite of a field")
    p.add_argument("--input", help="PGM providing the field (default: run.source profile)")
    return ap


def _load(args, command):
    cfg = parse_config(args.config) if args.config else default_config()
    run = dict(cfg.run)
    if args.seed is not None:
        run["seed"] = args.seed
    for attr, key in (("lam", "lambda"), ("tau", "tau"), ("steps", "steps")):
        if getattr(args, attr, None) is not None:
            run[key] = getattr(args, attr)
    cfg.run = run
    if getattr(args, "grid", None):
        cfg = _regrid(cfg, *args.grid)
    if getattr(args, "eps_schedule", None):
        cfg.solver = replace(cfg.solver, epsilon_schedule=args.eps_schedule)
    cfg.require(command)
    return cfg


def _regrid(cfg, nx, ny):
    new = cfg.regrid(nx, ny)
    new.run, new.solver = cfg.run, cfg.solver
    return new


def _image_config(cfg, path):
    img = load_pgm(path)
    if (img.height, img.width) != cfg.grid.shape:
        cfg = _regrid(cfg, img.width, img.height)
    return cfg, img.pixels


def synthetic_image(grid, rng, noise=0.1):
    """Two flat regions (0.3 left, 0.8 right) plus Gaussian noise, clipped to [0, 1]."""
    X, _ = grid.centers()
    clean = np.where(X < 0.5 * grid.nx * grid.hx, 0.3, 0.8)
    return np.clip(clean + noise * rng.standard_normal(grid.shape), 0.0, 1.0)


def _save(V, path):
    ny, nx = V.shape
    save_pgm(ImageBuffer(nx, ny, V), path)


def cmd_solve_aux(args, out):
    cfg = _load(args, "solve-aux")
    lam = cfg.run["lambda"]
    if args.source_image:
        cfg, pixels = _image_config(cfg, args.source_image)
        g = lam * pixels
    elif "source" in cfg.run:
        g = lam * profile(cfg.run["source"], cfg.grid)
    else:
        g = lam * cfg.rng().random(cfg.grid.shape)
    spec = cfg.phase_spec()
    p = build_exponent_field(profile(cfg.run["exponent"], cfg.grid), cfg.grid) if "exponent" in cfg.run else None
    if args.eps_schedule:
        rep = epsilon_continuation(g, spec, p, lam, cfg.solver)
    else:
        rep = solve_auxiliary(g, spec, p, lam, cfg.solver)
    print(f"iters {rep.iters}  energy {rep.energy_final:.17g}  grad_residual {rep.grad_residual:.3e}")
    print(f"box_violation {rep.box_violation:.3e}  stop {rep.stop_reason}")
    if rep.sandwich is not None:
        for e, j, up in zip(rep.sandwich.eps, rep.sandwich.mins_per_eps, rep.sandwich.upper_bounds):
            print(f"eps {e:g}  min J {j:.17g}  upper {up:.17g}")
    _save(rep.V, os.path.join(out, "V.pgm"))
    if args.trace:
        emit_trace(rep, args.trace)
    return 0


def cmd_denoise(args, out):
    cfg = _load(args, "denoise")
    inp = args.input or cfg.run.get("input")
    if inp:
        cfg, u0 = _image_config(cfg, inp)
    else:
        u0 = synthetic_image(cfg.grid, cfg.rng(), cfg.run.get("noise", 0.1))
        _save(u0, os.path.join(out, "noisy.pgm"))
    traj = evolve(
        u0,
        cfg.run["tau"],
        cfg.reaction_source(),
        cfg.phase_spec(),
        None,
        cfg.solver,
        max_steps=cfg.run.get("steps", 500),
        steady_tol=cfg.run.get("steady_tol", 1e-6),
    )
    final = traj.states[-1]
    print(f"steps {len(traj.states) - 1}  steady {traj.steady}  final residual {traj.final_residual:.3e}")
    print(f"range [{final.min():.6f}, {final.max():.6f}]")
    _save(final, args.output or cfg.run.get("output") or os.path.join(out, "denoised.pgm"))
    if args.trace:
        emit_trace(traj, args.trace)
    return 0 if traj.steady else 2


def cmd_steady(args, out):
    cfg = _load(args, "steady-states")
    rep = minimal_maximal_solutions(
        cfg.reaction_source(),
        cfg.phase_spec(),
        None,
        cfg.solver,
        iter_tol=cfg.run.get("iter_tol", 1e-6),
        max_outer=cfg.run.get("max_outer", 500),
    )
    print(f"iterations min {rep.iterations_min} max {rep.iterations_max}  monotone {rep.monotone_ok}")
    print(f"fixed-point residual min {rep.fixed_point_residual_min:.3e} max {rep.fixed_point_residual_max:.3e}")
    print(f"unique {rep.unique}  gap {float(np.max(rep.U_max - rep.U_min)):.3e}")
    _save(rep.U_min, os.path.join(out, "U_min.pgm"))
    _save(rep.U_max, os.path.join(out, "U_max.pgm"))
    emit_trace(rep.history_min, os.path.join(out, "iterations_min.csv"), kind="step")
    emit_trace(rep.history_max, os.path.join(out, "iterations_max.csv"), kind="step")
    return 0


def cmd_verify(args, out):
    cfg = _load(args, "verify")
    report = run_corpus(cfg)
    for name, ok, detail in report.results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<12} {detail}")
    return 0 if report.passed else 1


def cmd_norm(args, out):
    cfg = _load(args, "norm")
    if args.input:
        cfg, u = _image_config(cfg, args.input)
    elif "source" in cfg.run:
        u = profile(cfg.run["source"], cfg.grid)
    else:
        u = cfg.rng().standard_normal(cfg.grid.shape)
    grid = cfg.grid
    p = build_exponent_field(profile(cfg.run["exponent"], grid), grid) if "exponent" in cfg.run else cfg.phase_spec().p_max
    r = luxemburg_norm(u, p)
    suite = modular_property_suite(u, p, raise_on_failure=False)
    print(f"modular {r.modular_value:.17g}")
    print(f"norm {r.luxemburg_norm:.17g}  (bisection iterations {r.bisection_iters})")
    print(f"suite {'PASS' if suite.passed else 'FAIL ' + ','.join(suite.failures())}")
    return 0 if suite.passed else 1


COMMANDS = {
    "solve-aux": cmd_solve_aux,
    "denoise": cmd_denoise,
    "steady-states": cmd_steady,
    "verify": cmd_verify,
    "norm": cmd_norm,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    os.makedirs(args.out, exist_ok=True)
    try:
        return COMMANDS[args.command](args, args.out)
    except (PxNeumannError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
