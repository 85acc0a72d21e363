"""Constitutive closures for a monatomic gas with a radiative component.

The molecular part is scale-invariant: p_M = theta^{5/2} P(Z) with
Z = rho / theta^{3/2}, and the matching internal energy and entropy

    e_M = (3/2) (theta^{5/2}/rho) P(Z),      s_M = S(Z),
    S'(Z) = -(3/2) [(5/3) P(Z) - P'(Z) Z] / Z^2,

so that theta Ds = De + p D(1/rho) holds identically.  Radiation adds
p_R = (a/3) theta^4, e_R = a theta^4 / rho, s_R = (4a/3) theta^3 / rho,
which satisfies the same relation on its own.  Everything below is
dimensionless and vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, ModelViolationError, QuadratureError
from .expr import parse_pressure_law

_EPS = np.finfo(float).eps
_FD_REL = _EPS ** (1.0 / 3.0)  # optimal centered-difference step scale


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class GasModel:
    """Molecular pressure profile P(Z) and entropy normalization.

    P_inf is the declared large-Z limit of P(Z)/Z^{5/3}; asym_rtol is the
    relative tolerance used when certifying that limit.  S_closed, when
    given, is a closed-form S(Z) used instead of quadrature.
    """

    name: str
    P: Callable[[np.ndarray], np.ndarray]
    dP: Callable[[np.ndarray], np.ndarray]
    S0: float = 0.0
    P_inf: float = 0.0
    asym_rtol: float = 1e-6
    S_closed: Optional[Callable[[np.ndarray], np.ndarray]] = None
    law_text: Optional[str] = None


@dataclass(frozen=True)
class TransportModel:
    """Temperature-dependent viscosities and conductivity.

    b in (2/5, 1] is the growth exponent governing mu and eta; the declared
    constants are the model's own claims, re-fitted by hypothesis_report.
    """

    name: str
    mu: Callable[[np.ndarray], np.ndarray]
    eta: Callable[[np.ndarray], np.ndarray]
    kappa: Callable[[np.ndarray], np.ndarray]
    b: float = 1.0

    def __post_init__(self):
        if not (0.4 < self.b <= 1.0):
            raise ModelViolationError(f"growth exponent b={self.b} outside (2/5, 1]")


@dataclass(frozen=True)
class ScalingParams:
    """Dissipation scales: radiation a, viscosity nu, conductivity omega, damping lam."""

    a: float
    nu: float
    omega: float
    lam: float

    def __post_init__(self):
        vals = (self.a, self.nu, self.omega, self.lam)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"non-finite scaling parameters {vals}")
        if any(v < 0 for v in vals):
            raise DomainError(f"negative scaling parameters {vals}")


def ideal_gas(S0: float = 0.0) -> GasModel:
    """P(Z) = Z: p_M = rho theta, e_M = (3/2) theta, s_M = S0 - log Z."""
    return GasModel(
        name="ideal",
        P=lambda z: np.asarray(z, dtype=float),
        dP=lambda z: np.ones_like(np.asarray(z, dtype=float)),
        S0=S0,
        P_inf=0.0,
        S_closed=lambda z: S0 - np.log(z),
        law_text="Z",
    )


def gas_from_expression(name: str, text: str, S0: float = 0.0,
                        P_inf: float = 0.0, asym_rtol: float = 1e-6) -> GasModel:
    law = parse_pressure_law(text)
    return GasModel(name=name, P=law.P, dP=law.dP, S0=S0, P_inf=P_inf,
                    asym_rtol=asym_rtol, law_text=text)


def default_transport() -> TransportModel:
    return TransportModel(
        name="default",
        mu=lambda t: 1.0 + np.asarray(t, dtype=float),
        eta=lambda t: (1.0 + np.asarray(t, dtype=float)) / 10.0,
        kappa=lambda t: 1.0 + np.asarray(t, dtype=float) ** 3,
        b=1.0,
    )


def sublinear_transport(b: float = 0.75) -> TransportModel:
    """Generalized growth mu ~ 1 + theta^b with b in (2/5, 1)."""
    return TransportModel(
        name=f"sublinear-b{b:g}",
        mu=lambda t: 1.0 + np.asarray(t, dtype=float) ** b,
        eta=lambda t: (1.0 + np.asarray(t, dtype=float) ** b) / 10.0,
        kappa=lambda t: 1.0 + np.asarray(t, dtype=float) ** 3,
        b=b,
    )


# ---------------------------------------------------------------------------
# state helpers


def _check_state(rho, theta, allow_zero_rho=False):
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(theta))):
        raise DomainError("non-finite thermodynamic state")
    if np.any(theta <= 0.0):
        raise DomainError("temperature must be positive")
    lo = 0.0 if allow_zero_rho else None
    if allow_zero_rho:
        if np.any(rho < 0.0):
            raise DomainError("density must be nonnegative")
    else:
        if np.any(rho <= 0.0):
            raise DomainError("density must be positive")
    return rho, theta


def Z_of(rho, theta):
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return rho * theta ** -1.5


# ---------------------------------------------------------------------------
# pressure / energy / entropy


def pressure_parts(gas: GasModel, a: float, rho, theta):
    """(molecular, radiative) pressure parts."""
    rho, theta = _check_state(rho, theta, allow_zero_rho=True)
    p_mol = theta ** 2.5 * gas.P(Z_of(rho, theta))
    p_rad = (a / 3.0) * theta ** 4
    return p_mol, p_rad


def pressure(gas: GasModel, a: float, rho, theta):
    p_mol, p_rad = pressure_parts(gas, a, rho, theta)
    return p_mol + p_rad


def internal_energy(gas: GasModel, a: float, rho, theta):
    """Specific internal energy e = e_M + a theta^4 / rho (rho > 0)."""
    rho, theta = _check_state(rho, theta)
    return internal_energy_density(gas, a, rho, theta) / rho


def internal_energy_density(gas: GasModel, a: float, rho, theta):
    """rho e; well defined down to rho = 0 where it returns a theta^4."""
    rho, theta = _check_state(rho, theta, allow_zero_rho=True)
    return 1.5 * theta ** 2.5 * gas.P(Z_of(rho, theta)) + a * theta ** 4


def entropy_S(gas: GasModel, Z):
    """S(Z): closed form when available, else adaptive quadrature from Z=1."""
    if gas.S_closed is not None:
        return gas.S_closed(np.asarray(Z, dtype=float))
    return _S_quadrature(gas, Z)


def dS_dZ(gas: GasModel, Z):
    z = np.asarray(Z, dtype=float)
    return -1.5 * ((5.0 / 3.0) * gas.P(z) - gas.dP(z) * z) / z ** 2


def _S_quadrature(gas: GasModel, Z):
    z = np.atleast_1d(np.asarray(Z, dtype=float))
    if np.any(z <= 0.0):
        raise DomainError("S(Z) quadrature requires Z > 0")
    flat = z.ravel()
    pts = np.unique(np.concatenate((flat, [1.0])))

    def integrand(x):
        return float(dS_dZ(gas, x))

    segs = np.zeros(len(pts) - 1)
    for i in range(len(pts) - 1):
        lo, hi = pts[i], pts[i + 1]
        if hi - lo == 0.0:
            continue
        out = integrate.quad(integrand, lo, hi, epsabs=1e-10, epsrel=1e-12,
                             limit=200, full_output=1)
        val, abserr = out[0], out[1]
        if len(out) > 3:  # explanation message present => non-convergence
            raise QuadratureError(f"entropy quadrature failed on [{lo:g},{hi:g}]", abserr)
        segs[i] = val
    cum = np.concatenate(([0.0], np.cumsum(segs)))
    anchor = float(cum[np.searchsorted(pts, 1.0)])
    svals = gas.S0 + cum[np.searchsorted(pts, flat)] - anchor
    out = svals.reshape(z.shape)
    return out if np.ndim(Z) else float(out[()] if out.shape == () else out[0])


def entropy(gas: GasModel, a: float, rho, theta):
    """Specific entropy s = S(Z) + (4a/3) theta^3 / rho (rho > 0)."""
    rho, theta = _check_state(rho, theta)
    return entropy_S(gas, Z_of(rho, theta)) + (4.0 * a / 3.0) * theta ** 3 / rho


def entropy_density(gas: GasModel, a: float, rho, theta):
    """rho s, continued by 0 * S -> 0 at rho = 0 (rho log rho vanishes)."""
    rho, theta = _check_state(rho, theta, allow_zero_rho=True)
    scalar = np.ndim(rho) == 0 and np.ndim(theta) == 0
    rho_b, theta_b = np.broadcast_arrays(np.atleast_1d(rho), np.atleast_1d(theta))
    out = (4.0 * a / 3.0) * theta_b.astype(float) ** 3
    pos = rho_b > 0.0
    if np.any(pos):
        out[pos] += rho_b[pos] * np.asarray(entropy_S(gas, Z_of(rho_b[pos], theta_b[pos])))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# derivatives of the closures (exact, via P and P')


def heat_capacity_cv(gas: GasModel, rho, theta):
    """c_v = d e_M / d theta = (3/2) [(5/2) P(Z) - (3/2) Z P'(Z)] / Z; > 0."""
    rho, theta = _check_state(rho, theta)
    z = Z_of(rho, theta)
    cv = 1.5 * (2.5 * gas.P(z) - 1.5 * z * gas.dP(z)) / z
    if np.any(np.asarray(cv) <= 0.0):
        raise ModelViolationError("c_v <= 0: closure violates thermal stability")
    return cv


def cv_total(gas: GasModel, a: float, rho, theta):
    """d e / d theta for the full closure, radiation included."""
    rho, theta = _check_state(rho, theta)
    return heat_capacity_cv(gas, rho, theta) + 4.0 * a * theta ** 3 / rho


def dp_drho(gas: GasModel, a: float, rho, theta):
    rho, theta = _check_state(rho, theta, allow_zero_rho=True)
    return theta * gas.dP(Z_of(rho, theta))


def dp_dtheta(gas: GasModel, a: float, rho, theta):
    rho, theta = _check_state(rho, theta, allow_zero_rho=True)
    z = Z_of(rho, theta)
    return theta ** 1.5 * (2.5 * gas.P(z) - 1.5 * z * gas.dP(z)) + (4.0 * a / 3.0) * theta ** 3


def dpM_dtheta(gas: GasModel, rho, theta):
    return dp_dtheta(gas, 0.0, rho, theta)


def sound_speed_sq(gas: GasModel, a: float, rho, theta):
    """c_s^2 = dp/drho|_theta + theta (dp/dtheta|_rho)^2 / (rho^2 de/dtheta).

    For P(Z)=Z, a=0 this is (5/3) theta, the monatomic adiabatic speed.
    """
    rho, theta = _check_state(rho, theta)
    num = dp_dtheta(gas, a, rho, theta)
    c2 = dp_drho(gas, a, rho, theta) + theta * num ** 2 / (rho ** 2 * cv_total(gas, a, rho, theta))
    return np.maximum(c2, _EPS)


def _invert_molecular(gas, a, rho, e, rtol, max_iter):
    # bracketed Newton on F(theta) = 1.5 theta^{5/2} P(Z) + a theta^4 - e,
    # strictly increasing in theta for any admissible P
    def F(r, ev, th):
        z = r * th ** -1.5
        return 1.5 * th ** 2.5 * gas.P(z) + a * th ** 4 - ev

    t0 = e / (1.5 * rho)
    if a > 0.0:
        t0 = np.minimum(t0, (e / a) ** 0.25)
    lo = np.maximum(t0, 1e-30)
    f_lo = F(rho, e, lo)
    for _ in range(400):
        m = f_lo >= 0.0
        if not np.any(m):
            break
        lo[m] *= 0.5
        if np.any(lo[m] < 1e-120):
            raise DomainError(
                "no positive temperature: energy density at or below the "
                "zero-temperature compression bound"
            )
        f_lo[m] = F(rho[m], e[m], lo[m])
    else:
        raise DomainError("temperature bracket search failed from below")
    hi = np.maximum(2.0 * t0, 2.0 * lo)
    f_hi = F(rho, e, hi)
    for _ in range(400):
        m = f_hi <= 0.0
        if not np.any(m):
            break
        hi[m] *= 2.0
        f_hi[m] = F(rho[m], e[m], hi[m])
    else:
        raise DomainError("temperature bracket search failed from above")

    th = np.sqrt(lo * hi)
    for _ in range(max_iter):
        z = rho * th ** -1.5
        f = 1.5 * th ** 2.5 * gas.P(z) + a * th ** 4 - e
        lo = np.where(f < 0.0, th, lo)
        hi = np.where(f > 0.0, th, hi)
        df = 1.5 * (2.5 * th ** 1.5 * gas.P(z) - 1.5 * rho * gas.dP(z)) + 4.0 * a * th ** 3
        new = th - f / np.maximum(df, 1e-300)
        off = ~np.isfinite(new) | (new <= lo) | (new >= hi)
        new = np.where(off, 0.5 * (lo + hi), new)
        done = np.abs(new - th) <= rtol * np.abs(new)
        th = new
        if np.all(done):
            break
    return th


def temperature_from_energy(gas: GasModel, a: float, rho, e_density, rtol=1e-12, max_iter=160):
    """Invert the internal energy density 1.5 theta^{5/2} P(Z) + a theta^4 for theta.

    The left side is strictly increasing in theta, so the root is unique;
    it is found by a bracketed Newton iteration to relative tolerance rtol.
    Vacuum cells (rho = 0) are solved by the radiation branch alone and
    therefore require a > 0.
    """
    scalar = np.ndim(rho) == 0 and np.ndim(e_density) == 0
    rho_b, e_b = np.broadcast_arrays(np.asarray(rho, float), np.asarray(e_density, float))
    rho_b = np.atleast_1d(rho_b).astype(float)
    e_b = np.atleast_1d(e_b).astype(float)
    a = float(a)
    if not (np.all(np.isfinite(rho_b)) and np.all(np.isfinite(e_b))):
        raise DomainError("non-finite inputs to temperature inversion")
    if np.any(rho_b < 0.0):
        raise DomainError(f"negative density (min {np.min(rho_b)})")
    if np.any(e_b <= 0.0):
        raise DomainError("internal energy density must be positive to recover temperature")
    vac = rho_b == 0.0
    theta = np.empty_like(e_b)
    if np.any(vac):
        if a <= 0.0:
            raise DomainError("vacuum cells carry no temperature information when a = 0")
        theta[vac] = (e_b[vac] / a) ** 0.25
    act = ~vac
    if np.any(act):
        theta[act] = _invert_molecular(gas, a, rho_b[act], e_b[act], rtol, max_iter)
    return float(theta[0]) if scalar else theta


# ---------------------------------------------------------------------------
# transport fluxes


def stress_tensor(transport: TransportModel, nu: float, theta, grad_u):
    """nu [ mu(theta)(G + G^T - (2/3) tr(G) I) + eta(theta) tr(G) I ].

    grad_u has shape (d, d, ...) with G[i, j] = d u_i / d x_j; theta
    broadcasts against the trailing field axes.  The deviatoric factor 2/3
    is the three-dimensional one regardless of d (lower-dimensional fields
    are planar sections of 3-D flow).
    """
    G = np.asarray(grad_u, dtype=float)
    d = G.shape[0]
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DomainError("temperature must be positive")
    div = np.trace(G, axis1=0, axis2=1)
    sym = G + np.swapaxes(G, 0, 1)
    mu = transport.mu(theta)
    eta = transport.eta(theta)
    S = nu * mu * sym
    iso = nu * (eta - (2.0 / 3.0) * mu) * div
    for i in range(d):
        S[i, i] += iso
    return S


def heat_flux(transport: TransportModel, omega: float, theta, grad_theta):
    """Fourier flux q = -omega kappa(theta) grad(theta)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0):
        raise DomainError("temperature must be positive")
    return -omega * transport.kappa(theta) * np.asarray(grad_theta, dtype=float)


def shear_tensor_sq(grad_u):
    """|G + G^T - (2/3) tr(G) I|^2 with the 3-D trace embedding.

    For d < 3 the suppressed diagonal entries -(2/3) tr(G) are included, so
    the value matches the full 3-D tensor norm of a planar field.
    """
    G = np.asarray(grad_u, dtype=float)
    d = G.shape[0]
    div = np.trace(G, axis1=0, axis2=1)
    sym = G + np.swapaxes(G, 0, 1)
    total = np.zeros_like(div)
    for i in range(d):
        for j in range(d):
            A = sym[i, j] - (2.0 / 3.0) * div * (1.0 if i == j else 0.0)
            total = total + A ** 2
    total = total + (3 - d) * ((2.0 / 3.0) * div) ** 2
    return total


# ---------------------------------------------------------------------------
# Gibbs-relation checks


def gibbs_residual_from(p_fn, e_fn, s_fn, rho, theta):
    """Residuals of theta Ds = De + p D(1/rho) for arbitrary closures.

    Returns (theta ds/dtheta - de/dtheta,
             theta ds/drho - de/drho + p/rho^2),
    with centered differences of relative step eps^(1/3).
    """
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ht = _FD_REL * np.maximum(np.abs(theta), 1e-8)
    hr = _FD_REL * np.maximum(np.abs(rho), 1e-8)
    ds_dt = (s_fn(rho, theta + ht) - s_fn(rho, theta - ht)) / (2.0 * ht)
    de_dt = (e_fn(rho, theta + ht) - e_fn(rho, theta - ht)) / (2.0 * ht)
    ds_dr = (s_fn(rho + hr, theta) - s_fn(rho - hr, theta)) / (2.0 * hr)
    de_dr = (e_fn(rho + hr, theta) - e_fn(rho - hr, theta)) / (2.0 * hr)
    res1 = theta * ds_dt - de_dt
    res2 = theta * ds_dr - de_dr + p_fn(rho, theta) / rho ** 2
    return res1, res2


def gibbs_residual(gas: GasModel, a: float, rho, theta):
    """Gibbs residual pair for the full closures (molecular + radiation)."""
    rho, theta = _check_state(rho, theta)
    return gibbs_residual_from(
        lambda r, t: pressure(gas, a, r, t),
        lambda r, t: internal_energy(gas, a, r, t),
        lambda r, t: entropy(gas, a, r, t),
        rho, theta,
    )


# ---------------------------------------------------------------------------
# hypothesis certification


@dataclass(frozen=True)
class HypothesisCheck:
    label: str
    passed: bool
    witness: str


@dataclass(frozen=True)
class HypothesisReport:
    checks: tuple[HypothesisCheck, ...]

    def __getitem__(self, label: str) -> HypothesisCheck:
        for c in self.checks:
            if c.label == label:
                return c
        raise KeyError(label)

    def passed(self, label: str) -> bool:
        return self[label].passed

    def pattern(self) -> dict:
        return {c.label: c.passed for c in self.checks}

    def format_lines(self) -> list[str]:
        return [
            f"{c.label} {'PASS' if c.passed else 'FAIL'}  {c.witness}"
            for c in self.checks
        ]


def _tail_bounded(theta_grid, values, factor=2.0):
    """True when the sup of |values| over the last decade of theta_grid does

    not exceed `factor` times the sup over the decade before it (a finite-grid
    stand-in for boundedness as theta grows)."""
    t = np.asarray(theta_grid, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    tmax = t.max()
    last = v[t >= tmax / 10.0]
    prev = v[(t >= tmax / 100.0) & (t < tmax / 10.0)]
    if len(prev) == 0 or len(last) == 0:
        return True, 1.0
    ratio = float(last.max() / max(prev.max(), 1e-300))
    return ratio <= factor, ratio


def hypothesis_report(gas: GasModel, transport: TransportModel,
                      Z_grid=None, theta_grid=None) -> HypothesisReport:
    """Certify the structural requirements on P, S and the transport laws.

    Labels:
      H2: P(0) = 0 and P' > 0 including at Z = 0.
      H3: 0 < [(5/3)P - P'Z]/Z bounded on the grid, and P/Z^{5/3} approaches
          the declared P_inf at the largest sampled Z.
      H6: S' < 0 on the grid.
      H7: S(Z) -> 0 as Z grows (decay of |S| along the grid tail).
      H8: mu >= mu_low (1+theta^b) with positive fitted mu_low, |mu'| bounded
          (tail-growth criterion), 0 <= eta <= eta_up (1+theta^b).
      H9: kappa/(1+theta^3) bounded between positive fitted constants.
    Every label yields pass/fail plus a witness string; nothing raises.
    """
    if Z_grid is None:
        Z_grid = np.logspace(-3, 3, 121)
    if theta_grid is None:
        theta_grid = np.logspace(-2, 2, 81)
    z = np.asarray(Z_grid, dtype=float)
    th = np.asarray(theta_grid, dtype=float)
    checks = []

    # H2
    P0 = float(gas.P(np.asarray(0.0)))
    dP_pts = np.concatenate(([float(gas.dP(np.asarray(0.0)))], np.asarray(gas.dP(z), dtype=float).ravel()))
    z_pts = np.concatenate(([0.0], z))
    ok = abs(P0) <= 1e-14 and bool(np.all(dP_pts > 0.0))
    if ok:
        wit = f"P(0)={P0:.1e}, min P'={dP_pts.min():.6g}"
    else:
        bad = z_pts[np.argmin(dP_pts)] if np.any(dP_pts <= 0.0) else 0.0
        wit = f"P(0)={P0:.3e}, P'({bad:g})={dP_pts.min():.3e}"
    checks.append(HypothesisCheck("H2", ok, wit))

    # H3: ratio bounds + asymptote approach
    ratio = ((5.0 / 3.0) * np.asarray(gas.P(z)) - np.asarray(gas.dP(z)) * z) / z
    ratio_ok = bool(np.all(ratio > 0.0)) and bool(np.all(np.isfinite(ratio)))
    v = np.asarray(gas.P(z)) / z ** (5.0 / 3.0)
    i_mid = int(np.argmin(np.abs(z - math.sqrt(z.max()))))
    d_end = abs(float(v[-1]) - gas.P_inf)
    d_mid = abs(float(v[i_mid]) - gas.P_inf)
    asym_ok = d_end <= gas.asym_rtol * (1.0 + abs(gas.P_inf)) or d_end <= 0.5 * d_mid
    ok = ratio_ok and asym_ok
    wit = (f"ratio in [{ratio.min():.6g}, {ratio.max():.6g}], "
           f"|P/Z^(5/3) - P_inf| = {d_end:.3e} at Z={z[-1]:g}")
    checks.append(HypothesisCheck("H3", ok, wit))

    # H6
    sprime = np.asarray(dS_dZ(gas, z))
    ok = bool(np.all(sprime < 0.0))
    wit = f"max S' = {sprime.max():.6g}" if ok else f"S'({z[np.argmax(sprime)]:g}) = {sprime.max():.3e}"
    checks.append(HypothesisCheck("H6", ok, wit))

    # H7: |S| must decay along the tail toward 0
    try:
        S_end = float(np.asarray(entropy_S(gas, z[-1])))
        S_mid = float(np.asarray(entropy_S(gas, z[i_mid])))
        ok = abs(S_end) <= 1e-8 or abs(S_end) <= 0.5 * abs(S_mid)
        wit = f"S({z[i_mid]:g}) = {S_mid:.6g}, S({z[-1]:g}) = {S_end:.6g}"
    except QuadratureError as err:
        ok, wit = False, f"quadrature failed: {err}"
    checks.append(HypothesisCheck("H7", ok, wit))

    # H8: mu lower bound, |mu'| tail-bounded, eta within [0, eta_up (1+theta^b)]
    base = 1.0 + th ** transport.b
    mu = np.asarray(transport.mu(th), dtype=float)
    eta = np.asarray(transport.eta(th), dtype=float)
    hm = _FD_REL * th
    dmu = (np.asarray(transport.mu(th + hm)) - np.asarray(transport.mu(th - hm))) / (2 * hm)
    mu_low = float((mu / base).min())
    mu_ratio_ok, mu_growth = _tail_bounded(th, mu / base)
    dmu_ok, dmu_growth = _tail_bounded(th, dmu)
    eta_up = float((eta / base).max())
    eta_ok = bool(np.all(eta >= -1e-14)) and _tail_bounded(th, eta / base)[0]
    ok = mu_low > 0.0 and mu_ratio_ok and dmu_ok and eta_ok
    wit = (f"fitted mu_low={mu_low:.6g}, sup|mu'| tail growth {dmu_growth:.3g}x, "
           f"fitted eta_up={eta_up:.6g}" + ("" if ok else f"; witness theta={th.max():g}"))
    checks.append(HypothesisCheck("H8", ok, wit))

    # H9
    kap = np.asarray(transport.kappa(th), dtype=float) / (1.0 + th ** 3)
    kap_low, kap_up = float(kap.min()), float(kap.max())
    kap_ok, kap_growth = _tail_bounded(th, kap)
    ok = kap_low > 0.0 and kap_ok and bool(np.all(np.isfinite(kap)))
    wit = f"fitted kappa in [{kap_low:.6g}, {kap_up:.6g}]" + ("" if ok else f"; witness theta={th.max():g}")
    checks.append(HypothesisCheck("H9", ok, wit))

    return HypothesisReport(tuple(checks))


def aux_bounds_check(gas: GasModel, rho, theta):
    """Fit the auxiliary growth constants of the molecular closures.

    Returns (C, c) with, over the sample,
        rho s_M <= C rho (1 + |log rho| + [log theta]_+) ,
        rho e_M >= c (rho theta + rho^{5/3}).
    c must come out finite and positive; C = 0 means no sampled state makes
    the left side positive (then any positive constant works).
    """
    rho, theta = _check_state(rho, theta)
    rho, theta = np.broadcast_arrays(np.atleast_1d(rho), np.atleast_1d(theta))
    rho, theta = rho.ravel().astype(float), theta.ravel().astype(float)
    z = Z_of(rho, theta)
    sM = np.asarray(entropy_S(gas, z), dtype=float)
    denom = 1.0 + np.abs(np.log(rho)) + np.maximum(np.log(theta), 0.0)
    C = max(float((sM / denom).max()), 0.0)
    e_density = 1.5 * theta ** 2.5 * np.asarray(gas.P(z), dtype=float)
    c = float((e_density / (rho * theta + rho ** (5.0 / 3.0))).min())
    if not (math.isfinite(C) and math.isfinite(c)) or c <= 0.0:
        raise ModelViolationError(f"auxiliary bound fit degenerate: C={C}, c={c}")
    return C, c
