"""Run configuration files.

Grammar::

    file   := block*
    block  := NAME '{' (KEY '=' VALUE)* '}'
    VALUE  := number | "quoted string" | bare-word

``#`` starts a comment.  Blocks are ``grid``, ``phase`` (repeatable),
``reaction``, ``solver`` and ``run``.  Field-valued keys accept a number
or a profile string:

    "constant c"          c everywhere
    "linear-ramp a b"     a at x = 0 rising to b at x = 1 (unit coordinates)
    "linear-ramp-y a b"   same along y
    "radial a b"          a at the centre, b at the corners
    "checker a b"         a and b on alternating cells
"""
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .phases import build_phase_spec
from .reaction import build_reaction_source
from .solver import SolverConfig

_TOKEN = re.compile(r'\s*(?:(#[^\n]*)|([{}=])|"([^"]*)"|([^\s{}="#]+))')

GRID_KEYS = {"nx": int, "ny": int, "lx": float, "ly": float}
PHASE_KEYS = ("weight", "exponent")
REACTION_KEYS = ("alpha", "q1", "q2", "r", "kappa", "lambda0")
SOLVER_KEYS = {
    "grad_tol": float,
    "max_iters": int,
    "armijo_c": float,
    "step_init": float,
    "epsilon_schedule": "floats",
    "gradient_model": str,
    "metric": str,
    "error_tol": float,
    "stall_iters": int,
    "use_numba": "bool",
}
RUN_KEYS = {
    "command": str,
    "lambda": float,
    "tau": float,
    "steps": int,
    "steady_tol": float,
    "iter_tol": float,
    "max_outer": int,
    "input": str,
    "output": str,
    "source": "field",
    "exponent": "field",
    "seed": int,
    "noise": float,
}
REQUIRED = {"solve-aux": ("lambda",), "denoise": ("tau",)}


def profile(spec, grid):
    """Evaluate a number or profile string on the cell centres of ``grid``."""
    if isinstance(spec, (int, float)):
        return np.full(grid.shape, float(spec))
    parts = str(spec).split()
    if not parts:
        raise ValueError("empty profile")
    name, args = parts[0], parts[1:]
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise ValueError(f"profile {spec!r} has non-numeric arguments") from None
    if len(parts) == 1:
        try:
            return np.full(grid.shape, float(name))
        except ValueError:
            pass
    X, Y = grid.centers()
    xs = X / (grid.nx * grid.hx)
    ys = Y / (grid.ny * grid.hy)
    arity = {"constant": 1, "linear-ramp": 2, "linear-ramp-y": 2, "radial": 2, "checker": 2}
    if name not in arity:
        raise ValueError(f"unknown profile {name!r}")
    if len(nums) != arity[name]:
        raise ValueError(f"profile {name!r} takes {arity[name]} arguments, got {len(nums)}")
    if name == "constant":
        return np.full(grid.shape, nums[0])
    a, b = nums
    if name == "linear-ramp":
        return a + (b - a) * xs
    if name == "linear-ramp-y":
        return a + (b - a) * ys
    if name == "radial":
        rad = np.hypot(xs - 0.5, ys - 0.5) / np.hypot(0.5, 0.5)
        return a + (b - a) * rad
    ii, jj = np.indices(grid.shape)
    return np.where((ii + jj) % 2 == 0, a, b)


def _tokens(text, path):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            line = text.count("\n", 0, pos) + 1
            raise ConfigError(path, None, f"cannot tokenize line {line}")
        pos = m.end()
        if m.group(1) is not None:
            continue
        line = text.count("\n", 0, m.start()) + 1
        if m.group(2) is not None:
            out.append(("sym", m.group(2), line))
        elif m.group(3) is not None:
            out.append(("str", m.group(3), line))
        elif m.group(4) is not None:
            out.append(("word", m.group(4), line))
    return out


def _value(kind, text):
    if kind == "str":
        return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_blocks(text, path="<string>"):
    """Return a list of ``(block_name, {key: value})`` in file order."""
    toks = _tokens(text, path)
    blocks = []
    i = 0
    while i < len(toks):
        kind, name, line = toks[i]
        if kind != "word" or i + 1 >= len(toks) or toks[i + 1][1] != "{":
            raise ConfigError(path, None, f"expected 'name {{' on line {line}")
        i += 2
        body = {}
        while True:
            if i >= len(toks):
                raise ConfigError(path, name, f"block '{name}' opened on line {line} is not closed")
            if toks[i] == ("sym", "}", toks[i][2]):
                i += 1
                break
            if i + 2 >= len(toks) or toks[i][0] == "sym" or toks[i + 1][1] != "=" or toks[i + 2][0] == "sym":
                raise ConfigError(path, name, f"expected 'key = value' on line {toks[i][2]}")
            key = toks[i][1]
            if key in body:
                raise ConfigError(path, f"{name}.{key}", "duplicate key")
            body[key] = _value(toks[i + 2][0], toks[i + 2][1])
            i += 3
        blocks.append((name, body))
    return blocks


@dataclass
class RunConfig:
    grid: Grid
    phases: list  # of (weight field, exponent field) arrays
    reaction: dict
    solver: SolverConfig
    run: dict = field(default_factory=dict)
    path: str = "<defaults>"
    blocks: list = field(default_factory=list, repr=False)

    def regrid(self, nx, ny):
        """Same file re-evaluated on an ``nx`` by ``ny`` grid (e.g. to match an image)."""
        return build_config(self.blocks, self.path, None, (nx, ny))

    def phase_spec(self):
        return build_phase_spec(self.phases, self.grid)

    def reaction_source(self):
        return build_reaction_source(self.grid, **self.reaction)

    @property
    def seed(self):
        return int(self.run.get("seed", 0))

    def rng(self):
        return np.random.default_rng(self.seed)

    def require(self, command):
        for key in REQUIRED.get(command, ()):
            if key not in self.run:
                raise ConfigError(self.path, f"run.{key}", f"'{key}' is required for {command}")


def _cast(path, key, kind, v):
    try:
        if kind == "floats":
            vals = v if isinstance(v, (list, tuple)) else str(v).replace(",", " ").split()
            return tuple(float(x) for x in vals)
        if kind == "bool":
            if isinstance(v, str):
                if v.lower() in ("true", "yes", "on", "1"):
                    return True
                if v.lower() in ("false", "no", "off", "0"):
                    return False
                raise ValueError(f"not a boolean: {v!r}")
            return bool(v)
        if kind == "field":
            return v
        if kind is int and isinstance(v, float) and not v.is_integer():
            raise ValueError(f"not an integer: {v!r}")
        return kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, key, str(exc)) from None


def _check_keys(path, block, body, allowed):
    for key in body:
        if key not in allowed:
            raise ConfigError(path, f"{block}.{key}", "unknown key")


def _field(path, key, v, grid):
    try:
        return profile(v, grid)
    except ValueError as exc:
        raise ConfigError(path, key, str(exc)) from None


def build_config(blocks, path="<string>", command=None, shape=None):
    seen = {}
    phase_bodies = []
    for name, body in blocks:
        if name == "phase":
            phase_bodies.append(body)
            continue
        if name not in ("grid", "reaction", "solver", "run"):
            raise ConfigError(path, name, "unknown block")
        if name in seen:
            raise ConfigError(path, name, "block given twice")
        seen[name] = body

    gb = seen.get("grid", {})
    _check_keys(path, "grid", gb, GRID_KEYS)
    gv = {k: _cast(path, f"grid.{k}", GRID_KEYS[k], v) for k, v in gb.items()}
    nx = gv.get("nx", 32)
    ny = gv.get("ny", nx)
    if shape is not None:
        nx, ny = shape
    try:
        grid = Grid(nx, ny, gv.get("lx", 1.0) / nx, gv.get("ly", 1.0) / ny)
    except ValueError as exc:
        raise ConfigError(path, "grid", str(exc)) from None

    if not phase_bodies:
        phase_bodies = [{"weight": 1.0, "exponent": 2.0}]
    phases = []
    for i, body in enumerate(phase_bodies):
        _check_keys(path, f"phase[{i}]", body, PHASE_KEYS)
        for key in PHASE_KEYS:
            if key not in body:
                raise ConfigError(path, f"phase[{i}].{key}", "missing")
        w = _field(path, f"phase[{i}].weight", body["weight"], grid)
        p = _field(path, f"phase[{i}].exponent", body["exponent"], grid)
        phases.append((w, p))

    rb = seen.get("reaction", {})
    _check_keys(path, "reaction", rb, REACTION_KEYS)
    reaction = {}
    for k, v in rb.items():
        if k in ("alpha", "lambda0"):
            reaction[k] = _cast(path, f"reaction.{k}", float, v)
        else:
            reaction[k] = _field(path, f"reaction.{k}", v, grid)

    sb = seen.get("solver", {})
    _check_keys(path, "solver", sb, SOLVER_KEYS)
    sv = {k: _cast(path, f"solver.{k}", SOLVER_KEYS[k], v) for k, v in sb.items()}
    try:
        solver = SolverConfig(**sv)
    except ValueError as exc:
        raise ConfigError(path, "solver", str(exc)) from None

    ub = seen.get("run", {})
    _check_keys(path, "run", ub, RUN_KEYS)
    run = {k: _cast(path, f"run.{k}", RUN_KEYS[k], v) for k, v in ub.items()}
    for key in ("source", "exponent"):
        if key in run:
            _field(path, f"run.{key}", run[key], grid)

    cfg = RunConfig(grid, phases, reaction, solver, run, path, list(blocks))
    # invariants of the assembled objects, reported against the file
    try:
        cfg.phase_spec()
    except ValueError as exc:
        raise ConfigError(path, "phase", str(exc)) from None
    try:
        cfg.reaction_source()
    except ValueError as exc:
        raise ConfigError(path, "reaction", str(exc)) from None
    command = command or run.get("command")
    if command:
        cfg.require(command)
    return cfg


def parse_config(path, command=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build_config(parse_blocks(text, str(path)), str(path), command)


def default_config():
    return build_config([], "<defaults>")
