"""Inviscid reference runs on a fine grid: the smooth trio (rho, theta, u).

The compressible Euler equations are integrated with 4th-order centered
flux differences, SSP-RK3, and a weak 6th-difference hyper-dissipation
filter whose amplitude is calibrated so the induced total-energy drift
stays below a configured fraction of the initial energy.  Everything is
written in flux-difference form, so mass and total energy are conserved
to round-off on periodic boxes and across slip walls (the mirrored flux
values vanish bitwise at wall faces).

Smooth inviscid flow steepens and eventually leaves the classical regime;
`lifespan_monitor` watches the gradient history and declares the usable
time window.  `formulation_residuals` measures how well a stored run
satisfies the entropy-balance and thermal-energy reformulations of the
energy equation, which holds only while the solution stays smooth.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import grid_fields as gf
from . import thermo
from .errors import ConfigError, DomainError, PositivityError, UsageError
from .nsf_solver import recover_temperature

_DEPTH = 3  # 4th-order faces need 2 ghost layers, the filter needs 3


@dataclass(frozen=True)
class EulerRunConfig:
    """Inviscid reference run: fixed time step chosen from the initial state."""

    gas: thermo.GasModel
    grid: gf.Grid
    t_end: float
    cfl: float = 0.4
    output_stride: int = 2
    eps_f: float = 0.02
    drift_budget: float = 1e-6  # allowed |E(T)-E(0)| as a fraction of E(0)

    def __post_init__(self):
        if not (0.0 < self.cfl <= 0.9):
            raise ConfigError(f"cfl must lie in (0, 0.9], got {self.cfl}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be positive and finite, got {self.t_end}")
        if int(self.output_stride) < 1:
            raise ConfigError(f"output_stride must be at least 1, got {self.output_stride}")
        object.__setattr__(self, "output_stride", int(self.output_stride))
        if not (self.eps_f >= 0.0 and math.isfinite(self.eps_f)):
            raise ConfigError(f"filter amplitude must be nonnegative, got {self.eps_f}")
        if not (self.drift_budget > 0.0):
            raise ConfigError(f"drift budget must be positive, got {self.drift_budget}")


# ---------------------------------------------------------------------------
# spatial operator


def _strip(arr, grid, ax, depth=_DEPTH):
    # keep axis ax whole, restrict the others to the interior, put ax last
    lead = arr.ndim - grid.dim
    sl = [slice(None)] * lead
    for g, n in enumerate(grid.cells):
        sl.append(slice(None) if g == ax else slice(depth, depth + n))
    return np.moveaxis(arr[tuple(sl)], lead + ax, -1)


def _faces4(F):
    # 4th-order face average: difference of these faces is the centered
    # 5-point first derivative, so sums telescope exactly
    return (7.0 * (F[..., 2:-3] + F[..., 3:-2]) - (F[..., 1:-4] + F[..., 4:-1])) / 12.0


def _fifth_difference_faces(W):
    # composed differences keep uniform fields at exactly zero
    d = W[..., 1:] - W[..., :-1]
    for _ in range(2):
        d = (d[..., 2:] - d[..., 1:-1]) - (d[..., 1:-1] - d[..., :-2])
    return d


def _ghost_primitives(gas, g):
    e_int = g.etot - 0.5 * np.sum(g.mom * g.mom, axis=0) / g.rho
    if np.any(g.rho <= 0.0) or np.any(e_int <= 0.0):
        raise PositivityError("ghost extension lost positivity")
    theta = thermo.temperature_from_energy(gas, 0.0, g.rho, e_int)
    p = thermo.pressure(gas, 0.0, g.rho, theta)
    return g.mom / g.rho, p


def rhs_euler(state: gf.FluidState, gas: thermo.GasModel, grid: gf.Grid,
              eps_f: float = 0.0):
    """Tendencies of the inviscid (molecular-closure) system.

    4th-order centered flux differences plus, when eps_f > 0, a 6th-order
    hyper-dissipation flux scaled by the fastest signal speed per axis.
    """
    dim = grid.dim
    if eps_f > 0.0:
        theta = recover_temperature(state.rho, state.mom, state.etot, gas, 0.0)
        c = np.sqrt(thermo.sound_speed_sq(gas, 0.0, state.rho, theta))
        u = state.velocity()
    g = gf.fill_ghosts_slip(state, grid, depth=_DEPTH)
    W_g = np.concatenate([g.rho[None], g.mom, g.etot[None]], axis=0)
    u_g, p_g = _ghost_primitives(gas, g)

    out = np.zeros((2 + dim, *grid.cells))
    for ax in range(dim):
        dx = grid.spacing[ax]
        W = _strip(W_g, grid, ax)
        un = _strip(u_g[ax][None], grid, ax)[0]
        p = _strip(p_g, grid, ax)
        F = W * un[None]
        F[1 + ax] += p
        F[-1] += p * un
        faces = _faces4(F)
        dW = -(faces[..., 1:] - faces[..., :-1]) / dx
        if eps_f > 0.0:
            s = float(np.max(np.abs(u[ax]) + c))
            amp = eps_f * s / 64.0
            d5 = _fifth_difference_faces(W)
            dW += amp * (d5[..., 1:] - d5[..., :-1]) / dx
        out += np.moveaxis(dW, -1, 1 + ax)
    return out[0], out[1:-1], out[-1]


# ---------------------------------------------------------------------------
# time integration


def _speed_over_dx(state, gas, grid):
    theta = recover_temperature(state.rho, state.mom, state.etot, gas, 0.0)
    c = np.sqrt(thermo.sound_speed_sq(gas, 0.0, state.rho, theta))
    u = state.velocity()
    return max(float(np.max(np.abs(u[ax]) + c)) / grid.spacing[ax]
               for ax in range(grid.dim))


def _rk3(state, dt, gas, grid, eps_f):
    def stage(s, frac_old, old, t_new):
        drho, dmom, detot = rhs_euler(s, gas, grid, eps_f)
        rho = s.rho + dt * drho
        mom = s.mom + dt * dmom
        etot = s.etot + dt * detot
        if frac_old > 0.0:
            rho = frac_old * old.rho + (1.0 - frac_old) * rho
            mom = frac_old * old.mom + (1.0 - frac_old) * mom
            etot = frac_old * old.etot + (1.0 - frac_old) * etot
        return gf.FluidState(rho, mom, etot, t_new)

    t = state.time
    s1 = stage(state, 0.0, state, t + dt)
    s2 = stage(s1, 0.75, state, t + 0.5 * dt)
    return stage(s2, 1.0 / 3.0, state, t + dt)


def _gradient_maxima(state, grid):
    rho_g = gf.fill_ghosts_slip(state.rho, grid, depth=1)
    gr = float(np.max(np.abs(gf.gradient(rho_g, grid))))
    u_g = gf.fill_ghosts_slip(state.velocity(), grid, depth=1, vector=True)
    gu = max(float(np.max(np.abs(gf.gradient(u_g[c], grid))))
             for c in range(grid.dim))
    return gu, gr


@dataclass
class EulerTrajectory:
    """Stored instants of one inviscid reference run."""

    gas: thermo.GasModel
    grid: gf.Grid
    dt: float
    eps_f: float
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    grad_u_max: list = field(default_factory=list)
    grad_rho_max: list = field(default_factory=list)
    mass_drift: float = 0.0
    energy_drift: float = 0.0
    t_end: float = 0.0
    aborted: bool = False
    abort_reason: str = ""

    def final_state(self) -> gf.FluidState:
        return self.states[-1]

    def snapshot_spacing(self) -> float:
        return self.times[1] - self.times[0] if len(self.times) > 1 else 0.0


def _as_state(gas, initial) -> gf.FluidState:
    if isinstance(initial, gf.FluidState):
        return initial.copy()
    rho0, theta0, u0 = initial
    rho0 = np.asarray(rho0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape == rho0.shape:
        u0 = u0[None]
    mom = rho0 * u0
    etot = 0.5 * rho0 * np.sum(u0 * u0, axis=0) + thermo.internal_energy_density(
        gas, 0.0, rho0, np.asarray(theta0, dtype=float))
    return gf.FluidState(rho0, mom, etot, 0.0)


def _calibrate_filter(config: EulerRunConfig, state0: gf.FluidState, dt: float) -> float:
    """Largest tried amplitude whose projected energy drift fits the budget."""
    e0 = gf.integrate(state0.etot, config.grid)
    eps = config.eps_f
    for _ in range(40):
        if eps == 0.0:
            return 0.0
        s = state0.copy()
        try:
            for _ in range(10):
                s = _rk3(s, dt, config.gas, config.grid, eps)
        except (PositivityError, DomainError):
            eps *= 0.5
            continue
        drift = abs(gf.integrate(s.etot, config.grid) - e0)
        projected = drift * config.t_end / (10.0 * dt)
        if projected <= config.drift_budget * e0:
            return eps
        eps *= 0.5
    return eps


def run_euler(config: EulerRunConfig, initial, cache_dir=None) -> EulerTrajectory:
    """Integrate to t_end with a fixed step, storing every output_stride steps.

    The step is set once from the initial signal speeds; if the running
    Courant number later exceeds 0.95 the run aborts, which is treated as
    a life-span signal, not an error.
    """
    state = _as_state(config.gas, initial)
    if cache_dir is not None:
        key = reference_key(config, state)
        cached = _load_cached(config, cache_dir, key)
        if cached is not None:
            return cached

    over_dx = _speed_over_dx(state, config.gas, config.grid)
    n_steps = max(1, math.ceil(config.t_end * over_dx / config.cfl))
    dt = config.t_end / n_steps
    eps = _calibrate_filter(config, state, dt)

    traj = EulerTrajectory(gas=config.gas, grid=config.grid, dt=dt, eps_f=eps,
                           t_end=config.t_end)
    m0 = gf.integrate(state.rho, config.grid)
    e0 = gf.integrate(state.etot, config.grid)

    def record(s):
        traj.times.append(s.time)
        traj.states.append(s.copy())
        gu, gr = _gradient_maxima(s, config.grid)
        traj.grad_u_max.append(gu)
        traj.grad_rho_max.append(gr)

    record(state)
    for k in range(1, n_steps + 1):
        try:
            if _speed_over_dx(state, config.gas, config.grid) * dt > 0.95:
                raise DomainError("running Courant number exceeded 0.95")
            state = _rk3(state, dt, config.gas, config.grid, eps)
        except (PositivityError, DomainError) as err:
            traj.aborted = True
            traj.abort_reason = (f"stopped at t={state.time:.6g}: {err} "
                                 "(classical life span likely exceeded)")
            break
        state = gf.FluidState(state.rho, state.mom, state.etot, k * dt)
        if k % config.output_stride == 0 or k == n_steps:
            record(state)
    traj.mass_drift = abs(gf.integrate(traj.states[-1].rho, config.grid) - m0)
    traj.energy_drift = abs(gf.integrate(traj.states[-1].etot, config.grid) - e0)
    if cache_dir is not None and not traj.aborted:
        _store_cached(config, traj, cache_dir, key)
    return traj


# ---------------------------------------------------------------------------
# reformulation residuals


def _deriv4_axis(field_g, grid, ax):
    F = _strip(field_g, grid, ax)
    faces = _faces4(F)
    return np.moveaxis((faces[..., 1:] - faces[..., :-1]) / grid.spacing[ax],
                       -1, ax + (field_g.ndim - grid.dim))


def _div4(vec, grid):
    """4th-order divergence of an interior vector field with mirror ghosts."""
    v_g = gf.fill_ghosts_slip(vec, grid, depth=_DEPTH, vector=True)
    return sum(_deriv4_axis(v_g[ax], grid, ax) for ax in range(grid.dim))


@dataclass(frozen=True)
class FormulationResiduals:
    """L2 norms of the entropy-form and thermal-form balance residuals."""

    times: tuple
    entropy_norms: tuple
    thermal_norms: tuple

    @property
    def entropy_max(self) -> float:
        return max(self.entropy_norms)

    @property
    def thermal_max(self) -> float:
        return max(self.thermal_norms)


def formulation_residuals(traj: EulerTrajectory, gas: thermo.GasModel) -> FormulationResiduals:
    """Discrete residuals of the two smooth-regime energy reformulations.

    The entropy form is d/dt(rho s) + div(rho s u); the thermal form is
    c_v (d/dt(rho theta) + div(rho theta u)) + theta dp/dtheta div u.
    Time derivatives use the 4th-order centered stencil over the stored
    instants (the run uses a fixed step, so they are uniformly spaced).
    """
    if len(traj.times) < 5:
        raise UsageError("need at least five stored instants for time stencils")
    dts = np.diff(traj.times)
    # the final instant may sit off the stride; use the uniform prefix
    keep = len(traj.times)
    while keep > 2 and abs(dts[keep - 2] - dts[0]) > 1e-9 * dts[0]:
        keep -= 1
    if keep < 5:
        raise UsageError("stored instants are not uniformly spaced")
    traj_times = traj.times[:keep]
    dt = float(dts[0])
    grid = traj.grid

    prim, ent_dens, rtheta = [], [], []
    for s in traj.states[:keep]:
        theta = recover_temperature(s.rho, s.mom, s.etot, gas, 0.0)
        prim.append((s.rho, theta, s.velocity()))
        ent_dens.append(thermo.entropy_density(gas, 0.0, s.rho, theta))
        rtheta.append(s.rho * theta)

    def ddt(series, k):
        return (-series[k + 2] + 8.0 * series[k + 1]
                - 8.0 * series[k - 1] + series[k - 2]) / (12.0 * dt)

    times, ent, th = [], [], []
    for k in range(2, keep - 2):
        rho, theta, u = prim[k]
        u_gv = gf.fill_ghosts_slip(u, grid, depth=_DEPTH, vector=True)
        div_u = sum(_deriv4_axis(u_gv[ax], grid, ax) for ax in range(grid.dim))

        r_ent = ddt(ent_dens, k) + _div4(ent_dens[k][None] * u, grid)
        cv = thermo.heat_capacity_cv(gas, rho, theta)
        r_th = cv * (ddt(rtheta, k) + _div4(rtheta[k][None] * u, grid)) \
            + theta * thermo.dpM_dtheta(gas, rho, theta) * div_u

        times.append(traj_times[k])
        ent.append(gf.norm(r_ent, grid, 2))
        th.append(gf.norm(r_th, grid, 2))
    return FormulationResiduals(tuple(times), tuple(ent), tuple(th))


# ---------------------------------------------------------------------------
# life-span detection


@dataclass(frozen=True)
class LifespanReport:
    """Outcome of the gradient watch over one stored run."""

    smooth_through_end: bool
    t_star: float
    usable_until: float
    trigger: str  # "", "gradient-growth", "reciprocal-fit", "aborted"


def _envelope(times, g, blocks=16):
    # block maxima tame the sawtooth left by waves re-crossing the box
    n = len(g)
    if n < 2 * blocks:
        return times, g
    edges = np.linspace(0, n, blocks + 1).astype(int)
    picks = [a + int(np.argmax(g[a:b])) for a, b in zip(edges[:-1], edges[1:])]
    return times[picks], g[picks]


def _reciprocal_scan(times, g, t_end, window=5):
    """Earliest window whose 1/(T* - t) fit predicts a pole shortly ahead.

    A gradient racing to a finite-time pole makes 1/g linear in t with a
    negative slope, so windows of steady super-linear growth along the
    series envelope are fitted that way and accepted only when the fit is
    tight and the predicted pole lies past the window but within reach of
    the run.
    """
    t_env, g_env = _envelope(times, g)
    n = len(g_env)
    for i0 in range(0, n - window + 1):
        gw = g_env[i0:i0 + window]
        if gw[0] <= 0.0 or np.any(np.diff(gw) <= 0.0):
            continue
        if gw[-1] < 4.0 or gw[-1] < 2.0 * gw[0]:
            continue
        tw = t_env[i0:i0 + window]
        y = 1.0 / gw
        beta, alpha = np.polyfit(tw, y, 1)
        if beta >= 0.0:
            continue
        # 0.15 of the window range: a true pole fits far tighter, while
        # merely linear growth curves 1/g by about 0.17 of the range
        if np.max(np.abs(alpha + beta * tw - y)) > 0.15 * (y[0] - y[-1]):
            continue
        pole = float(-alpha / beta)
        if tw[-1] < pole <= 1.25 * t_end:
            return pole
    return None


def lifespan_monitor(traj: EulerTrajectory, growth_factor: float = 20.0,
                     safety: float = 0.8) -> LifespanReport:
    """Declare how long the stored run can be trusted as a classical solution.

    Exhaustion triggers when max|grad u| or max|grad rho| exceeds
    growth_factor times the initial gradient scale, or earlier when a
    stretch of either series grows super-linearly along a fitted
    1/(T* - t) envelope whose pole lands inside the run window.
    Comparisons downstream should stay below safety * T*.
    """
    times = np.asarray(traj.times, dtype=float)
    # one reference scale for both series: a field that starts uniform and
    # develops gradients comparable to the other field is not blowing up
    g_ref = max(traj.grad_u_max[0], traj.grad_rho_max[0], 1e-9)
    series = [np.asarray(raw, dtype=float) / g_ref
              for raw in (traj.grad_u_max, traj.grad_rho_max)]

    candidates = []
    for g in series:
        hit = np.nonzero(g > growth_factor)[0]
        if hit.size:
            candidates.append((float(times[hit[0]]), "gradient-growth"))
        pole = _reciprocal_scan(times, g, traj.t_end)
        if pole is not None:
            candidates.append((pole, "reciprocal-fit"))
    if not candidates and traj.aborted:
        candidates.append((float(times[-1]), "aborted"))

    if not candidates:
        return LifespanReport(smooth_through_end=True, t_star=float(traj.t_end),
                              usable_until=float(traj.t_end), trigger="")
    t_star, trigger = min(candidates)
    usable = min(safety * t_star, float(times[-1]))
    return LifespanReport(smooth_through_end=False, t_star=t_star,
                          usable_until=usable, trigger=trigger)


# ---------------------------------------------------------------------------
# compatibility of initial data with the walls


@dataclass(frozen=True)
class CompatibilityReport:
    """Wall-compatibility of initial data: orders k = 0, 1 checked, 2 reported."""

    k0_max: float
    k1_residual: float
    k1_threshold: float
    k1_pass: bool
    k2_status: str = "unchecked"


def _wall_points(grid, ax, side):
    coords = gf.cell_centers(grid)
    pts = []
    for g in range(grid.dim):
        if g == ax:
            pts.append(np.asarray(0.0 if side == 0 else grid.extents[ax]))
        else:
            pts.append(coords[g])
    if grid.dim == 1:
        return (pts[0].reshape(()),)
    return tuple(np.broadcast_arrays(*[p if np.ndim(p) else np.asarray([p]) for p in pts]))


def compatibility_check(rho_fn, theta_fn, u_fns, grid: gf.Grid,
                        gas: thermo.GasModel) -> CompatibilityReport:
    """Check wall compatibility of callable initial data.

    k=0: the normal velocity must vanish at the wall faces (sampled at the
    tangential cell centers); violation rejects the data.  k=1: the normal
    component of du/dt, extrapolated to the wall from the first two cell
    layers of the discrete tendency, must stay within the stencil's own
    discretization error.  k=2 needs second time derivatives of the
    operator and is reported as unchecked.
    """
    walls = [(ax, side) for ax in range(grid.dim) if grid.bc[ax] == "slip-wall"
             for side in (0, 1)]
    if not walls:
        raise UsageError("compatibility applies to grids with slip walls")
    X = gf.mesh(grid)
    u0 = np.stack([np.broadcast_to(np.asarray(f(*X), dtype=float), grid.cells)
                   for f in u_fns])
    scale = 1.0 + float(np.max(np.abs(u0)))

    k0 = 0.0
    for ax, side in walls:
        pts = _wall_points(grid, ax, side)
        k0 = max(k0, float(np.max(np.abs(np.asarray(u_fns[ax](*pts), dtype=float)))))
    if k0 > 1e-12 * scale:
        raise DomainError(
            f"initial velocity has a normal wall component (max {k0:.3e}); "
            "the data are incompatible with the slip condition"
        )

    rho0 = np.broadcast_to(np.asarray(rho_fn(*X), dtype=float), grid.cells)
    theta0 = np.broadcast_to(np.asarray(theta_fn(*X), dtype=float), grid.cells)
    state = _as_state(gas, (rho0, theta0, u0))
    drho, dmom, detot = rhs_euler(state, gas, grid, eps_f=0.0)
    dudt = (dmom - u0 * drho) / rho0
    rate_scale = 1.0 + float(np.max(np.abs(dudt)))

    k1 = 0.0
    h_rel = 0.0
    for ax, side in walls:
        f = np.moveaxis(dudt[ax], ax, 0)
        if side == 1:
            f = f[::-1]
        face = 1.5 * f[0] - 0.5 * f[1]  # linear extrapolation to the wall
        k1 = max(k1, float(np.max(np.abs(face))))
        h_rel = max(h_rel, grid.spacing[ax] / grid.extents[ax])
    threshold = 50.0 * h_rel ** 2 * rate_scale
    return CompatibilityReport(k0_max=k0, k1_residual=k1, k1_threshold=threshold,
                               k1_pass=bool(k1 <= threshold))


# ---------------------------------------------------------------------------
# sampling onto the coarse grid


def _block_mean(arr, ratios):
    for ax, r in enumerate(ratios):
        if r == 1:
            continue
        shape = arr.shape[:ax] + (arr.shape[ax] // r, r) + arr.shape[ax + 1:]
        arr = arr.reshape(shape).mean(axis=ax + 1)
    return arr


def sample_reference(traj: EulerTrajectory, t: float,
                     target: gf.Grid) -> gf.ReferenceFields:
    """Reference trio at time t on the target grid.

    Linear interpolation between the two bracketing stored instants, then
    conservative block averaging down to the (integer-ratio) coarser grid.
    """
    times = np.asarray(traj.times, dtype=float)
    tol = 1e-12 * max(1.0, float(times[-1]))
    if t < times[0] - tol or t > times[-1] + tol:
        raise UsageError(
            f"t={t} outside the stored range [{times[0]}, {times[-1]}]; "
            "extrapolation is not supported"
        )
    src = traj.grid
    if (len(target.cells) != len(src.cells) or target.bc != src.bc
            or any(abs(a - b) > 1e-12 for a, b in zip(target.extents, src.extents))):
        raise UsageError(f"target grid {target} does not tile the source grid {src}")
    ratios = []
    for nf, nc in zip(src.cells, target.cells):
        if nf % nc != 0:
            raise UsageError(f"source cells {src.cells} are not an integer "
                             f"multiple of target cells {target.cells}")
        ratios.append(nf // nc)

    k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 1))
    if k == len(times) - 1 or abs(times[k] - t) <= tol:
        lo = hi = traj.states[k]
        w = 0.0
    else:
        lo, hi = traj.states[k], traj.states[k + 1]
        w = (t - times[k]) / (times[k + 1] - times[k])

    def blend(a, b):
        return a if w == 0.0 else (1.0 - w) * a + w * b

    rho = _block_mean(blend(lo.rho, hi.rho), ratios)
    mom = np.stack([_block_mean(blend(lo.mom[c], hi.mom[c]), ratios)
                    for c in range(src.dim)])
    etot = _block_mean(blend(lo.etot, hi.etot), ratios)
    theta = recover_temperature(rho, mom, etot, traj.gas, 0.0)
    return gf.ReferenceFields(rho, theta, mom / rho, time=float(t))


# ---------------------------------------------------------------------------
# disk cache


def reference_key(config: EulerRunConfig, state: gf.FluidState) -> str:
    h = hashlib.sha256()
    g = config.grid
    meta = [
        "euler-reference 1",
        " ".join(repr(v) for v in g.extents),
        " ".join(str(v) for v in g.cells),
        " ".join(g.bc),
        config.gas.name, str(config.gas.law_text), repr(config.gas.S0),
        repr(config.gas.P_inf),
        repr(config.t_end), repr(config.cfl), str(config.output_stride),
        repr(config.eps_f), repr(config.drift_budget),
    ]
    h.update("\n".join(meta).encode("ascii"))
    for arr in (state.rho, state.mom, state.etot):
        h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return h.hexdigest()


def _cache_paths(cache_dir, key):
    root = os.path.join(str(cache_dir), f"euler-{key[:16]}")
    return root, os.path.join(root, "manifest.txt")


def _store_cached(config, traj, cache_dir, key):
    root, manifest = _cache_paths(cache_dir, key)
    os.makedirs(root, exist_ok=True)
    for i, (t, s) in enumerate(zip(traj.times, traj.states)):
        gf.write_snapshot(os.path.join(root, f"{i:05d}.snap"), config.grid, t,
                          {"rho": s.rho, "mom": s.mom, "etot": s.etot})
    lines = [
        f"key {key}",
        f"count {len(traj.states)}",
        f"dt {traj.dt!r}",
        f"eps_f {traj.eps_f!r}",
        f"t_end {traj.t_end!r}",
        f"mass_drift {traj.mass_drift!r}",
        f"energy_drift {traj.energy_drift!r}",
    ]
    with open(manifest, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_cached(config, cache_dir, key):
    root, manifest = _cache_paths(cache_dir, key)
    if not os.path.exists(manifest):
        return None
    meta = {}
    with open(manifest, encoding="ascii") as fh:
        for line in fh:
            k, _, v = line.strip().partition(" ")
            meta[k] = v
    if meta.get("key") != key:
        return None
    traj = EulerTrajectory(gas=config.gas, grid=config.grid,
                           dt=float(meta["dt"]), eps_f=float(meta["eps_f"]),
                           t_end=float(meta["t_end"]),
                           mass_drift=float(meta["mass_drift"]),
                           energy_drift=float(meta["energy_drift"]))
    for i in range(int(meta["count"])):
        grid, t, fields = gf.read_snapshot(os.path.join(root, f"{i:05d}.snap"))
        # 1-component vectors read back as scalars; restore the lead axis
        mom = fields["mom"].reshape(grid.dim, *grid.cells)
        state = gf.FluidState(fields["rho"], mom, fields["etot"], t)
        traj.times.append(t)
        traj.states.append(state)
        gu, gr = _gradient_maxima(state, config.grid)
        traj.grad_u_max.append(gu)
        traj.grad_rho_max.append(gr)
    return traj
