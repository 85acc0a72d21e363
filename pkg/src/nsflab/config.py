"""Run configuration files.

Plain `key = value` text, one pair per line, `#` starts a comment.  Every
key must be known: a misspelled key is a hard error, never a silent default.
The same schema describes single runs (dissipative or inviscid) and
parameter sweeps; `render` writes a mapping back in canonical order so that
a resolved configuration can be stored next to its outputs and re-parsed.
"""

from __future__ import annotations

import math

import numpy as np

from . import euler_reference as er
from . import grid_fields as gf
from . import nsf_solver as ns
from . import scenarios
from . import thermo
from .errors import ConfigError

# canonical key order for render(); the comment is the documented meaning
KNOWN_KEYS = (
    ("solver",                "nsf or euler"),
    ("gas.name",              "ideal, or a label for a custom pressure law"),
    ("gas.law",               "P(Z) expression, required when gas.name is not ideal"),
    ("gas.S0",                "entropy normalization constant"),
    ("gas.P_inf",             "limit of P(Z)/Z^{5/3}, needed by the custom law"),
    ("transport.name",        "default or sublinear"),
    ("transport.b",           "growth exponent for the sublinear family"),
    ("scaling.a",             "radiation scale"),
    ("scaling.nu",            "viscosity scale"),
    ("scaling.omega",         "heat-conduction scale"),
    ("scaling.lambda",        "velocity damping scale"),
    ("grid.extent",           "box side lengths, one or two floats"),
    ("grid.cells",            "cells per axis, one or two ints"),
    ("grid.bc",               "slip-wall or periodic"),
    ("cfl",                   "time-step safety factor"),
    ("t_end",                 "final time"),
    ("output.stride",         "steps between stored snapshots"),
    ("floors",                "positivity floors for rho and theta, two floats"),
    ("convective.order",      "auto, 2, or 4"),
    ("init.name",             "uniform, acoustic-entropy, or compressive-pulse"),
    ("init.amplitude",        "perturbation amplitude"),
    ("init.gap",              "ill-preparedness offset (second-harmonic weight)"),
    ("sweep.a-values",        "radiation scales for the sweep, strictly decreasing"),
    ("sweep.alpha",           "nu = a^alpha along the path"),
    ("sweep.beta",            "omega = a^beta along the path"),
    ("sweep.gamma",           "lambda = a^gamma along the path"),
    ("sweep.reference-factor", "reference grid refinement over grid.cells"),
    ("sweep.reference-stride", "output stride of the reference run"),
    ("sweep.gap",             "init.gap applied to the dissipative runs only"),
)
_KEY_ORDER = tuple(k for k, _ in KNOWN_KEYS)
_KEY_SET = frozenset(_KEY_ORDER)


def parse_text(text: str) -> dict:
    """Parse configuration text into a {key: raw string} mapping."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    unknown = sorted(set(out) - _KEY_SET)
    if unknown:
        raise ConfigError("unknown configuration keys: " + ", ".join(unknown))
    return out


def load_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_text(fh.read())


def render(mapping: dict) -> str:
    """Write a mapping back as configuration text in canonical key order."""
    unknown = sorted(set(mapping) - _KEY_SET)
    if unknown:
        raise ConfigError("unknown configuration keys: " + ", ".join(unknown))
    lines = [f"{key} = {mapping[key]}" for key in _KEY_ORDER if key in mapping]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# typed getters


def _get(cfg, key, default=None):
    if key in cfg:
        return cfg[key]
    if default is None:
        raise ConfigError(f"missing required key {key!r}")
    return default


def get_float(cfg, key, default=None) -> float:
    raw = _get(cfg, key, default)
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: expected a finite number, got {raw!r}")
    return val


def get_int(cfg, key, default=None) -> int:
    raw = _get(cfg, key, default)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def get_floats(cfg, key, default=None) -> tuple:
    raw = _get(cfg, key, default)
    try:
        vals = tuple(float(tok) for tok in str(raw).split())
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {raw!r}") from None
    if not vals:
        raise ConfigError(f"{key}: expected at least one number")
    return vals


def get_choice(cfg, key, default, allowed) -> str:
    raw = str(_get(cfg, key, default))
    if raw not in allowed:
        raise ConfigError(
            f"{key}: expected one of {', '.join(allowed)}; got {raw!r}")
    return raw


# ---------------------------------------------------------------------------
# model builders


def build_gas(cfg: dict) -> thermo.GasModel:
    name = str(_get(cfg, "gas.name", "ideal"))
    S0 = get_float(cfg, "gas.S0", "0.0")
    if name == "ideal":
        if "gas.law" in cfg:
            raise ConfigError("gas.law must be omitted when gas.name is ideal")
        return thermo.ideal_gas(S0=S0)
    if "gas.law" not in cfg:
        raise ConfigError(f"gas.name = {name}: a custom gas needs gas.law")
    return thermo.gas_from_expression(
        name, cfg["gas.law"], S0=S0, P_inf=get_float(cfg, "gas.P_inf", "0.0"))


def build_transport(cfg: dict) -> thermo.TransportModel:
    name = get_choice(cfg, "transport.name", "default",
                       ("default", "sublinear"))
    if name == "default":
        if "transport.b" in cfg:
            raise ConfigError(
                "transport.b applies only to the sublinear family")
        return thermo.default_transport()
    return thermo.sublinear_transport(b=get_float(cfg, "transport.b", "0.75"))


def build_grid(cfg: dict) -> gf.Grid:
    extents = get_floats(cfg, "grid.extent")
    cells_raw = _get(cfg, "grid.cells")
    try:
        cells = tuple(int(tok) for tok in str(cells_raw).split())
    except ValueError:
        raise ConfigError(
            f"grid.cells: expected integers, got {cells_raw!r}") from None
    if len(extents) != len(cells):
        raise ConfigError(
            f"grid.extent has {len(extents)} entries, grid.cells has {len(cells)}")
    bc = get_choice(cfg, "grid.bc", "slip-wall", ("slip-wall", "periodic"))
    return gf.Grid(extents=extents, cells=cells, bc=(bc,) * len(cells))


def build_scaling(cfg: dict) -> thermo.ScalingParams:
    return thermo.ScalingParams(
        a=get_float(cfg, "scaling.a"),
        nu=get_float(cfg, "scaling.nu"),
        omega=get_float(cfg, "scaling.omega"),
        lam=get_float(cfg, "scaling.lambda"),
    )


def build_scenario(cfg: dict, grid: gf.Grid) -> scenarios.Scenario:
    return scenarios.build(
        str(_get(cfg, "init.name", "acoustic-entropy")),
        grid,
        amplitude=get_float(cfg, "init.amplitude", "0.01"),
        gap=get_float(cfg, "init.gap", "0.0"),
    )


def build_run(cfg: dict):
    """Assemble a single run -> (kind, run config, scenario).

    kind is "nsf" or "euler"; the run config is the matching solver's
    configuration object, the scenario supplies the initial data.
    """
    kind = get_choice(cfg, "solver", "nsf", ("nsf", "euler"))
    gas = build_gas(cfg)
    grid = build_grid(cfg)
    scenario = build_scenario(cfg, grid)
    t_end = get_float(cfg, "t_end")
    cfl = get_float(cfg, "cfl", "0.4")
    stride = get_int(cfg, "output.stride", "10")
    if kind == "euler":
        for key in ("scaling.a", "scaling.nu", "scaling.omega",
                    "scaling.lambda", "transport.name", "transport.b",
                    "floors", "convective.order"):
            if key in cfg:
                raise ConfigError(f"{key} does not apply to the inviscid solver")
        run = er.EulerRunConfig(gas=gas, grid=grid, t_end=t_end, cfl=cfl,
                                output_stride=stride)
        return kind, run, scenario
    floors = get_floats(cfg, "floors", "1e-12 1e-12")
    if len(floors) != 2:
        raise ConfigError(f"floors: expected two numbers, got {cfg['floors']!r}")
    run = ns.NsfRunConfig(
        gas=gas,
        transport=build_transport(cfg),
        scaling=build_scaling(cfg),
        grid=grid,
        t_end=t_end,
        cfl=cfl,
        output_stride=stride,
        positivity_floor=floors,
        convective_order=get_choice(cfg, "convective.order", "auto",
                                     ("auto", "2", "4")),
    )
    return kind, run, scenario


def describe_keys() -> str:
    """Documentation block for --help and the README."""
    width = max(len(k) for k, _ in KNOWN_KEYS)
    return "\n".join(f"{k.ljust(width)}  {doc}" for k, doc in KNOWN_KEYS)
