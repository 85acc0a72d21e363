"""Inequality checks on computed trajectories.

Everything here is post-processing: uniform bounds that must hold across a
dissipation sweep, the velocity interpolation inequality, the relative
energy inequality term by term, and the convergence-rate envelope that the
sweep compares against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import grid_fields as gf
from . import relative_energy as renergy
from . import thermo
from .errors import DomainError, UsageError


@dataclass(frozen=True)
class DataBounds:
    """Witnessed initial-data bounds: total mass at least M, sup norms at most D."""

    M: float
    D: float

    def __post_init__(self):
        if not (self.M > 0.0 and math.isfinite(self.M)):
            raise DomainError(f"initial mass bound M must be positive and finite, got {self.M}")
        if not (self.D > 0.0 and math.isfinite(self.D)):
            raise DomainError(f"initial sup bound D must be positive and finite, got {self.D}")


def rate_envelope(scaling: thermo.ScalingParams) -> float:
    """max{a, nu, omega, lambda, nu/sqrt(a), omega/a, (a/sqrt(nu^3 lambda))^(1/3)}.

    The last three terms are singular when a, nu, or lambda vanish, so those
    parameters must be strictly positive here (omega may be zero).
    """
    a, nu, omega, lam = scaling.a, scaling.nu, scaling.omega, scaling.lam
    if a <= 0.0 or nu <= 0.0 or lam <= 0.0:
        raise DomainError(
            f"rate envelope needs a, nu, lambda > 0, got a={a}, nu={nu}, lambda={lam}"
        )
    terms = (
        a,
        nu,
        omega,
        lam,
        nu / math.sqrt(a),
        omega / a,
        (a / math.sqrt(nu ** 3 * lam)) ** (1.0 / 3.0),
    )
    return max(terms)


def envelope_terms(scaling: thermo.ScalingParams) -> dict:
    """The seven envelope terms by name, for reports."""
    a, nu, omega, lam = scaling.a, scaling.nu, scaling.omega, scaling.lam
    if a <= 0.0 or nu <= 0.0 or lam <= 0.0:
        raise DomainError(
            f"rate envelope needs a, nu, lambda > 0, got a={a}, nu={nu}, lambda={lam}"
        )
    return {
        "a": a,
        "nu": nu,
        "omega": omega,
        "lambda": lam,
        "nu_over_sqrt_a": nu / math.sqrt(a),
        "omega_over_a": omega / a,
        "radiation_mix": (a / math.sqrt(nu ** 3 * lam)) ** (1.0 / 3.0),
    }


def interpolation_check(velocities, grid: gf.Grid) -> float:
    """Worst ratio ||u||_4 / (||u||_6^{3/4} ||u||_2^{1/4}) over velocity snapshots.

    Must not exceed 1 + 1e-12 (discrete Hoelder is exact); an all-zero
    snapshot contributes 0 by convention.
    """
    worst = 0.0
    for u in velocities:
        n2 = gf.norm(u, grid, 2)
        if n2 == 0.0:
            continue
        n4 = gf.norm(u, grid, 4)
        n6 = gf.norm(u, grid, 6)
        worst = max(worst, n4 / (n6 ** 0.75 * n2 ** 0.25))
    return worst


# ---------------------------------------------------------------------------
# uniform energy bounds


@dataclass(frozen=True)
class UniformBoundsReport:
    """Sup-in-time state bounds and time-integrated dissipation of one run.

    Across a dissipation sweep with fixed initial data, every entry must
    stay below one constant; that uniformity is what the sweep checks.
    """

    kinetic_sup: float            # sup_t of integral rho |u|^2
    rho_five_thirds_sup: float    # sup_t of integral rho^{5/3}
    rho_theta_sup: float          # sup_t of integral rho theta
    radiation_sup: float          # sup_t of a integral theta^4
    stress_time_integral: float   # nu int_0^T int |grad u + grad u^T - (2/3) div I|^2
    damping_time_integral: float  # lambda int_0^T int |u|^2
    thermal_time_integral: float  # omega int_0^T int (|grad theta|^2 + |log theta|^2)

    def values(self) -> dict:
        return {
            "kinetic_sup": self.kinetic_sup,
            "rho_five_thirds_sup": self.rho_five_thirds_sup,
            "rho_theta_sup": self.rho_theta_sup,
            "radiation_sup": self.radiation_sup,
            "stress_time_integral": self.stress_time_integral,
            "damping_time_integral": self.damping_time_integral,
            "thermal_time_integral": self.thermal_time_integral,
        }

    def to_text(self) -> str:
        return "".join(f"{k} {v!r}\n" for k, v in self.values().items())


def _grad_vector(u, grid):
    u_g = gf.fill_ghosts_slip(u, grid, depth=1, vector=True)
    return np.stack([gf.gradient(u_g[c], grid) for c in range(grid.dim)])


def _grad_scalar(f, grid):
    return gf.gradient(gf.fill_ghosts_slip(f, grid, depth=1), grid)


def uniform_bounds(trajectory, scaling: thermo.ScalingParams = None) -> UniformBoundsReport:
    """State and dissipation bounds over the stored instants of one run.

    Temperature recovery uses the run's own radiation constant; the
    reported weights come from `scaling` when given (default: the run's).
    """
    # local import: the solver module needs DataBounds from here at load time
    from .nsf_solver import recover_temperature

    cfg = trajectory.config
    sc = cfg.scaling if scaling is None else scaling
    grid = cfg.grid
    times = np.asarray(trajectory.times, dtype=float)

    sups = np.zeros(4)
    rates = np.zeros((len(times), 3))
    for k, state in enumerate(trajectory.states):
        rho = state.rho
        theta = recover_temperature(rho, state.mom, state.etot, cfg.gas,
                                    cfg.scaling.a)
        u = state.velocity()
        u_sq = np.sum(u * u, axis=0)
        sups = np.maximum(sups, [
            gf.integrate(rho * u_sq, grid),
            gf.integrate(rho ** (5.0 / 3.0), grid),
            gf.integrate(rho * theta, grid),
            sc.a * gf.integrate(theta ** 4, grid),
        ])
        G = _grad_vector(u, grid)
        gth = _grad_scalar(theta, grid)
        rates[k] = [
            gf.integrate(thermo.shear_tensor_sq(G), grid),
            gf.integrate(u_sq, grid),
            gf.integrate(np.sum(gth * gth, axis=0) + np.log(theta) ** 2, grid),
        ]
    if len(times) > 1:
        ints = np.trapezoid(rates, times, axis=0)
    else:
        ints = np.zeros(3)
    return UniformBoundsReport(
        kinetic_sup=float(sups[0]), rho_five_thirds_sup=float(sups[1]),
        rho_theta_sup=float(sups[2]), radiation_sup=float(sups[3]),
        stress_time_integral=float(sc.nu * ints[0]),
        damping_time_integral=float(sc.lam * ints[1]),
        thermal_time_integral=float(sc.omega * ints[2]),
    )


# ---------------------------------------------------------------------------
# relative energy inequality, term by term

_LHS_NAMES = ("energy_change", "weighted_dissipation", "damping_energy")
_RHS_NAMES = (
    "convective_remainder", "stress_cross", "heat_cross", "damping_cross",
    "entropy_velocity", "material_derivative", "pressure_dilation",
    "entropy_transport", "pressure_relaxation",
)


@dataclass(frozen=True)
class RelEnergyResidualReport:
    """Every term of the relative energy inequality, cumulatively in time.

    All entries are running time integrals up to each stored instant
    except `energy`, which is the instantaneous relative energy; the
    inequality asserts residual = LHS - RHS <= discretization error.
    """

    times: tuple
    energy: tuple
    lhs: dict
    rhs: dict
    residual: tuple

    @property
    def max_residual(self) -> float:
        return max(self.residual)

    @property
    def max_excess(self) -> float:
        return max(self.max_residual, 0.0)

    def csv(self) -> str:
        names = _LHS_NAMES + _RHS_NAMES
        header = "t,energy," + ",".join(names) + ",residual"
        cols = [self.times, self.energy]
        cols += [self.lhs[n] for n in _LHS_NAMES]
        cols += [self.rhs[n] for n in _RHS_NAMES]
        cols.append(self.residual)
        lines = [header]
        for row in zip(*cols):
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = [
            f"instants {len(self.times)}",
            f"final_energy {self.energy[-1]!r}",
            f"sup_energy {max(self.energy)!r}",
            f"max_residual {self.max_residual!r}",
            f"max_excess {self.max_excess!r}",
        ]
        return "\n".join(lines) + "\n"


def rel_energy_inequality_residual(trajectory, reference, gas: thermo.GasModel = None,
                                   scaling: thermo.ScalingParams = None,
                                   window: float = None) -> RelEnergyResidualReport:
    """LHS - RHS of the relative energy inequality against a sampled reference.

    The test trio (r, Theta, U) is the reference trajectory sampled at the
    trajectory's output instants (restricted to t <= window when given);
    its time derivatives come from centered differences over those
    instants, spatial derivatives from mirror-ghost gradients, and all
    time integrals from the trapezoid rule.  The residual must not exceed
    the discretization error, which refinement studies quantify.
    """
    # local imports: the solver module needs DataBounds from here at load time
    from . import euler_reference as er
    from .nsf_solver import recover_temperature

    cfg = trajectory.config
    gas = cfg.gas if gas is None else gas
    sc = cfg.scaling if scaling is None else scaling
    tr = cfg.transport
    grid = cfg.grid

    times = np.asarray(trajectory.times, dtype=float)
    if window is not None:
        keep = times <= window * (1.0 + 1e-12)
        times = times[keep]
        states = [s for s, k in zip(trajectory.states, keep) if k]
    else:
        states = list(trajectory.states)
    if len(times) < 3:
        raise UsageError(
            f"need at least three stored instants inside the window, got {len(times)}"
        )

    refs = [er.sample_reference(reference, t, grid) for t in times]
    R = np.stack([rf.rho_E for rf in refs])
    TH = np.stack([rf.theta_E for rf in refs])
    U = np.stack([rf.u_E for rf in refs])
    P_ref = thermo.pressure(gas, sc.a, R, TH)
    dU_dt = np.gradient(U, times, axis=0, edge_order=2)
    dTH_dt = np.gradient(TH, times, axis=0, edge_order=2)
    dP_dt = np.gradient(P_ref, times, axis=0, edge_order=2)

    K = len(times)
    energy = np.zeros(K)
    lhs_rate = {n: np.zeros(K) for n in _LHS_NAMES[1:]}
    rhs_rate = {n: np.zeros(K) for n in _RHS_NAMES}
    for k, state in enumerate(states):
        rho = state.rho
        theta = recover_temperature(rho, state.mom, state.etot, gas, sc.a)
        u = state.velocity()
        G = _grad_vector(u, grid)
        gth = _grad_scalar(theta, grid)
        S = thermo.stress_tensor(tr, sc.nu, theta, G)
        q = thermo.heat_flux(tr, sc.omega, theta, gth)
        s_f = thermo.entropy(gas, sc.a, rho, theta)
        s_r = thermo.entropy(gas, sc.a, R[k], TH[k])
        p_f = thermo.pressure(gas, sc.a, rho, theta)

        G_E = _grad_vector(U[k], grid)
        gTH = _grad_scalar(TH[k], grid)
        gP = _grad_scalar(P_ref[k], grid)
        div_U = np.trace(G_E, axis1=0, axis2=1)
        v = u - U[k]
        ds = rho * (s_f - s_r)

        energy[k] = renergy.relative_energy(gas, sc.a, state, refs[k], grid)
        S_Gu = np.sum(S * G, axis=(0, 1))
        q_gth = np.sum(q * gth, axis=0)
        lhs_rate["weighted_dissipation"][k] = gf.integrate(
            TH[k] / theta * (S_Gu - q_gth / theta), grid)
        lhs_rate["damping_energy"][k] = sc.lam * gf.integrate(
            np.sum(u * u, axis=0), grid)

        rhs_rate["convective_remainder"][k] = -gf.integrate(
            rho * np.einsum("i...,ij...,j...->...", v, G_E, v), grid)
        rhs_rate["stress_cross"][k] = gf.integrate(np.sum(S * G_E, axis=(0, 1)), grid)
        rhs_rate["heat_cross"][k] = -gf.integrate(np.sum(q * gTH, axis=0) / theta, grid)
        rhs_rate["damping_cross"][k] = sc.lam * gf.integrate(np.sum(u * U[k], axis=0), grid)
        rhs_rate["entropy_velocity"][k] = -gf.integrate(ds * np.sum(v * gTH, axis=0), grid)
        acc = dU_dt[k] + np.einsum("j...,ij...->i...", U[k], G_E)
        rhs_rate["material_derivative"][k] = -gf.integrate(
            rho * np.sum(acc * v, axis=0), grid)
        rhs_rate["pressure_dilation"][k] = -gf.integrate(p_f * div_U, grid)
        rhs_rate["entropy_transport"][k] = -gf.integrate(
            ds * (dTH_dt[k] + np.sum(U[k] * gTH, axis=0)), grid)
        rhs_rate["pressure_relaxation"][k] = gf.integrate(
            (1.0 - rho / R[k]) * dP_dt[k] - (rho / R[k]) * np.sum(u * gP, axis=0), grid)

    def cumulative(rate):
        return cumulative_trapezoid(rate, times, initial=0.0)

    lhs = {"energy_change": energy - energy[0]}
    for name in _LHS_NAMES[1:]:
        lhs[name] = cumulative(lhs_rate[name])
    rhs = {name: cumulative(rhs_rate[name]) for name in _RHS_NAMES}
    residual = sum(lhs.values()) - sum(rhs.values())

    def plain(arr):
        return tuple(float(v) for v in arr)

    return RelEnergyResidualReport(
        times=plain(times), energy=plain(energy),
        lhs={n: plain(v) for n, v in lhs.items()},
        rhs={n: plain(v) for n, v in rhs.items()},
        residual=plain(residual),
    )
