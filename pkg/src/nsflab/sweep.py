"""Vanishing-dissipation parameter sweeps.

One inviscid reference run is computed on a finer grid (and disk-cached),
its trustworthy smooth horizon detected, and each path point then runs the
dissipative solver from the same closed-form initial data to that horizon.
The manifest records, per point, the initial relative energy, its sup over
the run, and the convergence-rate envelope; the fitted constant is the
largest ratio E_sup / (E_init + envelope), which the theory asserts stays
bounded along any admissible path.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from . import config as cfgmod
from . import diagnostics as diag
from . import euler_reference as er
from . import grid_fields as gf
from . import nsf_solver as ns
from . import scenarios
from . import thermo
from .errors import ConfigError, DomainError, UsageError


def validate_path(alpha: float, beta: float, gamma: float,
                  a_values=(1e-2, 1e-3, 1e-4)) -> list:
    """Violation messages for a path nu=a^alpha, omega=a^beta, lambda=a^gamma.

    Empty means admissible: the exponents satisfy beta > 1,
    1/2 < alpha < 2/3, 0 < gamma < 1 - (3/2) alpha, and the three envelope
    ratios omega/a, nu/sqrt(a), a/sqrt(nu^3 lambda) are confirmed to
    decrease numerically along the given a values.
    """
    problems = []
    for name, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            problems.append(f"{name} must be a finite number, got {v!r}")
    if problems:
        return problems
    if not (0.5 < alpha < 2.0 / 3.0):
        problems.append(f"alpha must lie in (1/2, 2/3), got {alpha}")
    if not (beta > 1.0):
        problems.append(f"beta must exceed 1, got {beta}")
    if not (0.0 < gamma < 1.0 - 1.5 * alpha):
        problems.append(
            f"gamma must lie in (0, 1 - (3/2) alpha) = (0, {1.0 - 1.5 * alpha:g}), "
            f"got {gamma}")
    if problems:
        return problems

    vals = tuple(float(a) for a in a_values)
    if len(vals) < 2:
        vals = (1e-2, 1e-3, 1e-4)
    ratios = {"omega/a": [], "nu/sqrt(a)": [], "a/sqrt(nu^3 lambda)": []}
    for a in vals:
        nu, omega, lam = a ** alpha, a ** beta, a ** gamma
        ratios["omega/a"].append(omega / a)
        ratios["nu/sqrt(a)"].append(nu / math.sqrt(a))
        ratios["a/sqrt(nu^3 lambda)"].append(a / math.sqrt(nu ** 3 * lam))
    for label, seq in ratios.items():
        if any(later >= earlier for earlier, later in zip(seq, seq[1:])):
            problems.append(f"{label} fails to decrease along the a values")
    return problems


@dataclass(frozen=True)
class ScalingPath:
    """Strictly decreasing a values with admissible path exponents."""

    a_values: tuple
    alpha: float = 0.55
    beta: float = 1.2
    gamma: float = 0.1

    def __post_init__(self):
        vals = tuple(float(v) for v in self.a_values)
        object.__setattr__(self, "a_values", vals)
        if not vals:
            raise DomainError("a path needs at least one a value")
        if any(not (v > 0.0 and math.isfinite(v)) for v in vals):
            raise DomainError(f"a values must be positive and finite, got {vals}")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise DomainError(f"a values must be strictly decreasing, got {vals}")
        problems = validate_path(self.alpha, self.beta, self.gamma, vals)
        if problems:
            raise DomainError("; ".join(problems))

    def scaling_for(self, a: float) -> thermo.ScalingParams:
        return thermo.ScalingParams(a=a, nu=a ** self.alpha,
                                    omega=a ** self.beta, lam=a ** self.gamma)

    def points(self) -> tuple:
        return tuple(self.scaling_for(a) for a in self.a_values)


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class RunRecord:
    """Per-point outcome; unhealthy runs stay in the manifest, out of the fit."""

    run_id: str
    a: float
    healthy: bool
    reason: str
    e_init: float
    e_sup: float
    envelope: float
    max_excess: float


@dataclass(frozen=True)
class SweepManifest:
    alpha: float
    beta: float
    gamma: float
    a_values: tuple
    config_hash: str
    grid_hash: str
    reference_key: str
    t_safe: float
    records: tuple
    fitted_constant: float
    flagged: bool

    def json(self) -> str:
        payload = asdict(self)
        payload["a_values"] = list(self.a_values)
        payload["records"] = [asdict(r) for r in self.records]
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: SweepManifest, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(manifest.json())


def read_manifest(path) -> SweepManifest:
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    payload["a_values"] = tuple(payload["a_values"])
    payload["records"] = tuple(RunRecord(**r) for r in payload["records"])
    return SweepManifest(**payload)


@dataclass(frozen=True)
class FitReport:
    """Per-point ratios E_sup / (E_init + envelope) and their maximum."""

    a_values: tuple
    ratios: tuple
    fitted_constant: float
    flagged: bool

    def to_text(self) -> str:
        lines = [f"a={a!r} ratio={r!r}"
                 for a, r in zip(self.a_values, self.ratios)]
        lines.append(f"fitted_constant {self.fitted_constant!r}")
        lines.append(f"flagged {self.flagged}")
        return "\n".join(lines) + "\n"


def fit_rate(manifest: SweepManifest) -> FitReport:
    """Bounded-constant check over the healthy runs of a sweep.

    The flag trips when some later ratio exceeds an earlier one by more
    than 10x: a growing ratio means the envelope is not tracking E_sup.
    """
    healthy = [r for r in manifest.records if r.healthy]
    if len(healthy) < 2:
        raise UsageError(
            f"rate fitting needs at least two healthy runs, got {len(healthy)}")
    ratios = tuple(r.e_sup / (r.e_init + r.envelope) for r in healthy)
    flagged = any(
        ratios[j] > 10.0 * ratios[i]
        for i in range(len(ratios)) for j in range(i + 1, len(ratios))
    )
    return FitReport(
        a_values=tuple(r.a for r in healthy),
        ratios=ratios,
        fitted_constant=max(ratios),
        flagged=flagged,
    )


# ---------------------------------------------------------------------------
# orchestration


@dataclass(frozen=True)
class SweepSetup:
    """Everything a sweep needs besides the output directory."""

    gas: thermo.GasModel
    transport: thermo.TransportModel
    path: ScalingPath
    grid: gf.Grid
    scenario_name: str = "acoustic-entropy"
    amplitude: float = 0.01
    gap: float = 0.0  # applied to the dissipative runs only
    t_end: float = 1.0
    cfl: float = 0.35
    output_stride: int = 16
    reference_factor: int = 4
    reference_stride: int = 4
    floors: tuple = (1e-12, 1e-12)
    convective_order: str = "auto"

    def __post_init__(self):
        if int(self.reference_factor) < 1:
            raise ConfigError(
                f"reference factor must be at least 1, got {self.reference_factor}")
        if int(self.reference_stride) < 1:
            raise ConfigError(
                f"reference stride must be at least 1, got {self.reference_stride}")
        object.__setattr__(self, "reference_factor", int(self.reference_factor))
        object.__setattr__(self, "reference_stride", int(self.reference_stride))

    def reference_grid(self) -> gf.Grid:
        return gf.Grid(
            extents=self.grid.extents,
            cells=tuple(n * self.reference_factor for n in self.grid.cells),
            bc=self.grid.bc,
        )


def setup_from_config(cfg: dict) -> SweepSetup:
    """Build a sweep from a parsed configuration mapping."""
    for key in ("solver", "scaling.a", "scaling.nu", "scaling.omega",
                "scaling.lambda", "init.gap"):
        if key in cfg:
            raise ConfigError(
                f"{key} does not apply to a sweep; the path sets the scalings "
                "and sweep.gap sets the ill-preparedness offset")
    path = ScalingPath(
        a_values=cfgmod.get_floats(cfg, "sweep.a-values", "1e-2 1e-3 1e-4"),
        alpha=cfgmod.get_float(cfg, "sweep.alpha", "0.55"),
        beta=cfgmod.get_float(cfg, "sweep.beta", "1.2"),
        gamma=cfgmod.get_float(cfg, "sweep.gamma", "0.1"),
    )
    floors = cfgmod.get_floats(cfg, "floors", "1e-12 1e-12")
    if len(floors) != 2:
        raise ConfigError(f"floors: expected two numbers, got {cfg['floors']!r}")
    return SweepSetup(
        gas=cfgmod.build_gas(cfg),
        transport=cfgmod.build_transport(cfg),
        path=path,
        grid=cfgmod.build_grid(cfg),
        scenario_name=str(cfg.get("init.name", "acoustic-entropy")),
        amplitude=cfgmod.get_float(cfg, "init.amplitude", "0.01"),
        gap=cfgmod.get_float(cfg, "sweep.gap", "0.0"),
        t_end=cfgmod.get_float(cfg, "t_end", "1.0"),
        cfl=cfgmod.get_float(cfg, "cfl", "0.35"),
        output_stride=cfgmod.get_int(cfg, "output.stride", "16"),
        reference_factor=cfgmod.get_int(cfg, "sweep.reference-factor", "4"),
        reference_stride=cfgmod.get_int(cfg, "sweep.reference-stride", "4"),
        floors=floors,
        convective_order=cfgmod.get_choice(cfg, "convective.order", "auto",
                                           ("auto", "2", "4")),
    )


def _gas_mapping(gas: thermo.GasModel) -> dict:
    m = {"gas.name": gas.name, "gas.S0": repr(gas.S0)}
    if gas.name != "ideal":
        if not gas.law_text:
            raise ConfigError(
                "only the ideal gas or a gas built from a pressure-law "
                "expression can be written to a configuration file")
        m["gas.law"] = gas.law_text
        m["gas.P_inf"] = repr(gas.P_inf)
    return m


def _transport_mapping(tr: thermo.TransportModel) -> dict:
    if tr.name == "default":
        return {"transport.name": "default"}
    if tr.name.startswith("sublinear"):
        return {"transport.name": "sublinear", "transport.b": repr(tr.b)}
    raise ConfigError(f"transport model {tr.name!r} has no configuration form")


def _grid_mapping(grid: gf.Grid) -> dict:
    kinds = set(grid.bc)
    if len(kinds) > 1:
        raise ConfigError("mixed per-axis boundary kinds have no configuration form")
    return {
        "grid.extent": " ".join(repr(v) for v in grid.extents),
        "grid.cells": " ".join(str(v) for v in grid.cells),
        "grid.bc": grid.bc[0],
    }


def _run_mapping(setup: SweepSetup, sc: thermo.ScalingParams, t_end: float) -> dict:
    m = {"solver": "nsf"}
    m.update(_gas_mapping(setup.gas))
    m.update(_transport_mapping(setup.transport))
    m.update(_grid_mapping(setup.grid))
    m.update({
        "scaling.a": repr(sc.a),
        "scaling.nu": repr(sc.nu),
        "scaling.omega": repr(sc.omega),
        "scaling.lambda": repr(sc.lam),
        "cfl": repr(setup.cfl),
        "t_end": repr(float(t_end)),
        "output.stride": str(setup.output_stride),
        "floors": " ".join(repr(v) for v in setup.floors),
        "convective.order": setup.convective_order,
        "init.name": setup.scenario_name,
        "init.amplitude": repr(setup.amplitude),
        "init.gap": repr(setup.gap),
    })
    return m


def _reference_mapping(setup: SweepSetup) -> dict:
    m = {"solver": "euler"}
    m.update(_gas_mapping(setup.gas))
    m.update(_grid_mapping(setup.reference_grid()))
    m.update({
        "cfl": repr(setup.cfl),
        "t_end": repr(setup.t_end),
        "output.stride": str(setup.reference_stride),
        "init.name": setup.scenario_name,
        "init.amplitude": repr(setup.amplitude),
        # the reference stays unperturbed; the gap belongs to the runs
        "init.gap": repr(0.0),
    })
    return m


def write_nsf_run(run_dir, mapping: dict, traj: ns.Trajectory) -> None:
    """Persist one dissipative run: resolved config, diagnostics CSV, snapshots."""
    rdir = Path(run_dir)
    rdir.mkdir(parents=True, exist_ok=True)
    (rdir / "run.cfg").write_text(cfgmod.render(mapping), encoding="ascii")
    traj.write_diagnostics(rdir / "solver.csv")
    grid = traj.config.grid
    for i, (t, s) in enumerate(zip(traj.times, traj.states)):
        gf.write_snapshot(rdir / f"{i:05d}.snap", grid, t,
                          {"rho": s.rho, "mom": s.mom, "etot": s.etot})


def load_run(run_dir):
    """Rebuild (mapping, run config, trajectory) from a stored run directory.

    Snapshots carry exact field bytes, so diagnostics recomputed from the
    loaded trajectory match the originals bit for bit.
    """
    rdir = Path(run_dir)
    mapping = cfgmod.load_file(rdir / "run.cfg")
    kind, run_cfg, _ = cfgmod.build_run(mapping)
    if kind != "nsf":
        raise UsageError(f"{rdir} does not hold a dissipative run")
    snaps = sorted(rdir.glob("*.snap"))
    if not snaps:
        raise UsageError(f"no snapshots stored in {rdir}")
    traj = ns.Trajectory(config=run_cfg)
    grid = run_cfg.grid
    for p in snaps:
        sgrid, t, fields = gf.read_snapshot(p)
        if sgrid.cells != grid.cells or sgrid.extents != grid.extents:
            raise UsageError(f"snapshot {p} does not match the run grid")
        # 1-D momentum is stored flat; restore the component axis
        mom = fields["mom"].reshape(grid.dim, *grid.cells)
        traj.times.append(float(t))
        traj.states.append(gf.FluidState(fields["rho"], mom, fields["etot"], t))
    return mapping, run_cfg, traj


def _hash16(text: str) -> str:
    return hashlib.sha256(text.encode("ascii")).hexdigest()[:16]


def run_id_for(a: float) -> str:
    return f"a{a:.3e}"


def _run_point(setup: SweepSetup, reference, a: float, t_safe: float,
               out: Path) -> RunRecord:
    sc = setup.path.scaling_for(a)
    run_id = run_id_for(a)
    rdir = out / "runs" / run_id
    mapping = _run_mapping(setup, sc, t_safe)
    _, run_cfg, scenario = cfgmod.build_run(mapping)
    traj = ns.simulate(run_cfg, scenario.fields(run_cfg.grid))
    write_nsf_run(rdir, mapping, traj)

    envelope = diag.rate_envelope(sc)
    nan = float("nan")
    if not traj.healthy:
        return RunRecord(run_id=run_id, a=a, healthy=False,
                         reason=traj.health_reason or "unhealthy run",
                         e_init=nan, e_sup=nan, envelope=envelope,
                         max_excess=nan)
    if len(traj.times) < 3:
        return RunRecord(run_id=run_id, a=a, healthy=False,
                         reason="too few stored instants for diagnostics",
                         e_init=nan, e_sup=nan, envelope=envelope,
                         max_excess=nan)
    report = diag.rel_energy_inequality_residual(traj, reference)
    bounds = diag.uniform_bounds(traj)
    (rdir / "relenergy.csv").write_text(report.csv(), encoding="ascii")
    (rdir / "bounds.txt").write_text(bounds.to_text(), encoding="ascii")
    (rdir / "summary.txt").write_text(report.summary(), encoding="ascii")
    return RunRecord(
        run_id=run_id, a=a, healthy=True, reason="",
        e_init=float(report.energy[0]), e_sup=float(max(report.energy)),
        envelope=envelope, max_excess=float(report.max_excess),
    )


def run_sweep(setup: SweepSetup, out_dir, threads: int = 1) -> SweepManifest:
    """Reference run, one dissipative run per path point, manifest and plot data.

    Worker threads only parallelize independent path points; every output
    is written by the worker that owns it and records are assembled in path
    order, so thread count never changes any result.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    ref_mapping = _reference_mapping(setup)
    _, ref_cfg, ref_scenario = cfgmod.build_run(ref_mapping)
    (out / "reference.cfg").write_text(cfgmod.render(ref_mapping), encoding="ascii")
    if "slip-wall" in setup.grid.bc:
        er.compatibility_check(ref_scenario.rho, ref_scenario.theta,
                               ref_scenario.u, ref_cfg.grid, setup.gas)
    ref_state = er._as_state(setup.gas, ref_scenario.fields(ref_cfg.grid))
    ref_key = er.reference_key(ref_cfg, ref_state)
    reference = er.run_euler(ref_cfg, ref_state, cache_dir=out / "reference-cache")
    life = er.lifespan_monitor(reference)
    t_safe = life.usable_until
    if not (t_safe > 0.0):
        raise UsageError(
            "the reference run provides no usable smooth horizon "
            f"(trigger: {life.trigger or 'none'})")

    def worker(a):
        return _run_point(setup, reference, a, t_safe, out)

    a_values = setup.path.a_values
    if int(threads) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            records = tuple(pool.map(worker, a_values))
    else:
        records = tuple(worker(a) for a in a_values)

    healthy = [r for r in records if r.healthy]
    manifest = SweepManifest(
        alpha=setup.path.alpha, beta=setup.path.beta, gamma=setup.path.gamma,
        a_values=a_values,
        config_hash=_hash16(cfgmod.render(ref_mapping)),
        grid_hash=_hash16(repr((setup.grid.extents, setup.grid.cells, setup.grid.bc))),
        reference_key=ref_key,
        t_safe=float(t_safe),
        records=records,
        fitted_constant=float("nan"),
        flagged=False,
    )
    if len(healthy) >= 2:
        fit = fit_rate(manifest)
        manifest = replace(manifest, fitted_constant=fit.fitted_constant,
                           flagged=fit.flagged)
    write_manifest(manifest, out / "manifest.json")

    lines = ["# a envelope e_sup e_sup_over_envelope"]
    for r in healthy:
        lines.append(f"{r.a!r} {r.envelope!r} {r.e_sup!r} {r.e_sup / r.envelope!r}")
    (out / "plot_rate.dat").write_text("\n".join(lines) + "\n", encoding="ascii")
    return manifest
