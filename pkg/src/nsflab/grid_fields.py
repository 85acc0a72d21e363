"""Structured grids, ghost cells, discrete calculus, and field storage.

Cell-centered finite volumes on 1-D intervals and 2-D rectangles. Boundaries
are periodic or slip walls. A slip wall is realized by mirror ghosts: the
wall-normal velocity component is mirrored odd (so u·n vanishes at the wall
face) and every other quantity is mirrored even (zero normal derivative, so
the centered wall-face heat flux and the shear traction tangential to the
wall vanish as well).

All stencils are 2nd-order centered and exact on affine data when the ghost
values extend the field exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PositivityError, UsageError

_BC_KINDS = ("periodic", "slip-wall")


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid: box extents, cell counts, per-axis boundary kind."""

    extents: tuple
    cells: tuple
    bc: tuple

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(v) for v in np.atleast_1d(self.extents)))
        object.__setattr__(self, "cells", tuple(int(v) for v in np.atleast_1d(self.cells)))
        bc = self.bc
        if isinstance(bc, str):
            bc = (bc,)
        object.__setattr__(self, "bc", tuple(str(v) for v in bc))
        dim = len(self.cells)
        if dim not in (1, 2):
            raise UsageError(f"grid dimension must be 1 or 2, got {dim}")
        if len(self.extents) != dim or len(self.bc) != dim:
            raise UsageError("extents, cells and bc must have one entry per axis")
        if any(n < 8 for n in self.cells):
            raise UsageError(f"need at least 8 cells per axis, got {self.cells}")
        if any(not (L > 0.0) or not math.isfinite(L) for L in self.extents):
            raise UsageError(f"extents must be positive and finite, got {self.extents}")
        for kind in self.bc:
            if kind not in _BC_KINDS:
                raise UsageError(f"unknown boundary kind {kind!r}, expected one of {_BC_KINDS}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.extents, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @classmethod
    def line(cls, length: float, cells: int, bc: str = "slip-wall") -> "Grid":
        return cls(extents=(length,), cells=(cells,), bc=(bc,))

    @classmethod
    def box(cls, lengths, cells, bc=("slip-wall", "slip-wall")) -> "Grid":
        return cls(extents=tuple(lengths), cells=tuple(cells), bc=tuple(bc))


def cell_centers(grid: Grid):
    """Per-axis 1-D arrays of cell-center coordinates."""
    return tuple(
        (np.arange(n) + 0.5) * h for n, h in zip(grid.cells, grid.spacing)
    )


def mesh(grid: Grid):
    """Cell-center coordinate arrays broadcast to the full grid shape."""
    if grid.dim == 1:
        return cell_centers(grid)
    return tuple(np.meshgrid(*cell_centers(grid), indexing="ij"))


def ghosted_centers(grid: Grid, depth: int):
    """Cell-center coordinates including ghost cells outside the box."""
    return tuple(
        (np.arange(-depth, n + depth) + 0.5) * h for n, h in zip(grid.cells, grid.spacing)
    )


# ---------------------------------------------------------------------------
# state containers


def _kinetic(rho, mom):
    ke = np.zeros_like(rho)
    pos = rho > 0.0
    ke[pos] = 0.5 * np.sum(mom[(slice(None),) + (pos,)] ** 2, axis=0) / rho[pos]
    return ke


@dataclass
class FluidState:
    """Conserved fields on the interior cells: density, momentum, total energy."""

    rho: np.ndarray
    mom: np.ndarray
    etot: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.mom = np.asarray(self.mom, dtype=float)
        self.etot = np.asarray(self.etot, dtype=float)
        self.time = float(self.time)
        dim = self.rho.ndim
        if self.mom.shape != (dim, *self.rho.shape) or self.etot.shape != self.rho.shape:
            raise UsageError(
                f"inconsistent field shapes rho {self.rho.shape}, mom {self.mom.shape}, "
                f"etot {self.etot.shape}"
            )
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.mom))
                and np.all(np.isfinite(self.etot))):
            raise PositivityError("non-finite values in fluid state")
        if np.any(self.rho < 0.0):
            raise PositivityError("negative density", state=self)
        if np.any((self.rho == 0.0) & np.any(self.mom != 0.0, axis=0)):
            raise PositivityError("momentum in a vacuum cell", state=self)
        ke = _kinetic(self.rho, self.mom)
        slack = 1e-12 * np.maximum(1.0, np.abs(self.etot))
        if np.any(self.etot + slack < ke):
            raise PositivityError("total energy below kinetic energy", state=self)

    def velocity(self) -> np.ndarray:
        """Momentum over density; zero in vacuum cells."""
        u = np.zeros_like(self.mom)
        pos = self.rho > 0.0
        u[(slice(None),) + (pos,)] = self.mom[(slice(None),) + (pos,)] / self.rho[pos]
        return u

    def kinetic_energy(self) -> np.ndarray:
        return _kinetic(self.rho, self.mom)

    def copy(self) -> "FluidState":
        return FluidState(self.rho.copy(), self.mom.copy(), self.etot.copy(), self.time)


@dataclass
class ReferenceFields:
    """Smooth reference trio (density, temperature, velocity) at cell centers."""

    rho_E: np.ndarray
    theta_E: np.ndarray
    u_E: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho_E = np.asarray(self.rho_E, dtype=float)
        self.theta_E = np.asarray(self.theta_E, dtype=float)
        self.u_E = np.asarray(self.u_E, dtype=float)
        self.time = float(self.time)
        dim = self.rho_E.ndim
        if self.theta_E.shape != self.rho_E.shape or self.u_E.shape != (dim, *self.rho_E.shape):
            raise UsageError(
                f"inconsistent reference shapes rho_E {self.rho_E.shape}, "
                f"theta_E {self.theta_E.shape}, u_E {self.u_E.shape}"
            )
        for name, arr in (("rho_E", self.rho_E), ("theta_E", self.theta_E)):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
                raise PositivityError(f"reference field {name} must be strictly positive")
        if not np.all(np.isfinite(self.u_E)):
            raise PositivityError("non-finite reference velocity")


# ---------------------------------------------------------------------------
# ghost cells


def ghost_depth(fld: np.ndarray, grid: Grid) -> int:
    """Ghost margin width inferred from the trailing array shape.

    Raises UsageError when the field carries no ghost margin (calculus on an
    interior-only array means the ghosts were never filled) or when the margin
    is inconsistent between axes.
    """
    shape = fld.shape[-grid.dim:]
    depths = set()
    for n, m in zip(grid.cells, shape):
        extra = m - n
        if extra <= 0 or extra % 2:
            raise UsageError(
                f"field shape {fld.shape} has no ghost margin for grid cells {grid.cells}; "
                "fill ghosts before applying stencils"
            )
        depths.add(extra // 2)
    if len(depths) != 1:
        raise UsageError(f"uneven ghost margins in field shape {fld.shape}")
    return depths.pop()


def _shifted(fld, grid, depth, axis, k):
    # interior view shifted by k cells along one grid axis
    lead = fld.ndim - grid.dim
    sl = [slice(None)] * lead
    for ax, n in enumerate(grid.cells):
        off = k if ax == axis else 0
        sl.append(slice(depth + off, depth + off + n))
    return fld[tuple(sl)]


def interior_of(fld: np.ndarray, grid: Grid, depth: int = None) -> np.ndarray:
    """Strip the ghost margin, returning the interior view."""
    if depth is None:
        depth = ghost_depth(fld, grid)
    return _shifted(fld, grid, depth, axis=-1, k=0)


def _pad_axis(arr, axis, depth, kind, odd):
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (depth, depth)
    if kind == "periodic":
        return np.pad(arr, pad, mode="wrap")
    out = np.pad(arr, pad, mode="symmetric")
    if odd:
        lo = [slice(None)] * arr.ndim
        hi = [slice(None)] * arr.ndim
        lo[axis] = slice(0, depth)
        hi[axis] = slice(out.shape[axis] - depth, None)
        out[tuple(lo)] *= -1.0
        out[tuple(hi)] *= -1.0
    return out


def _fill_scalar(arr, grid, depth, odd_axes=()):
    arr = np.asarray(arr, dtype=float)
    ghosted = tuple(n + 2 * depth for n in grid.cells)
    if arr.shape == ghosted:
        arr = interior_of(arr, grid, depth)
    elif arr.shape != grid.cells:
        raise UsageError(
            f"field shape {arr.shape} matches neither interior {grid.cells} "
            f"nor ghosted {ghosted}"
        )
    out = arr
    for ax in range(grid.dim):
        out = _pad_axis(out, ax, depth, grid.bc[ax], ax in odd_axes)
    return out


def _fill_vector(u, grid, depth):
    u = np.asarray(u, dtype=float)
    if u.shape[0] != grid.dim:
        raise UsageError(f"vector field must have {grid.dim} components, got shape {u.shape}")
    # component c flips sign across the wall normal to axis c
    return np.stack([_fill_scalar(u[c], grid, depth, odd_axes=(c,)) for c in range(grid.dim)])


@dataclass
class GhostedState:
    """Conserved fields extended with filled ghost margins."""

    rho: np.ndarray
    mom: np.ndarray
    etot: np.ndarray
    depth: int


def fill_ghosts_slip(fld, grid: Grid, depth: int = 1, vector: bool = False):
    """Extend a field (or a whole state) with ghost cells per the grid bc.

    Periodic axes wrap. Slip-wall axes mirror: even parity for scalars and
    tangential velocity, odd parity for the wall-normal velocity or momentum
    component. Accepts interior arrays or already-ghosted arrays of the same
    depth, so the operation is idempotent.
    """
    if depth < 1:
        raise UsageError("ghost depth must be at least 1")
    if isinstance(fld, FluidState):
        return GhostedState(
            rho=_fill_scalar(fld.rho, grid, depth),
            mom=_fill_vector(fld.mom, grid, depth),
            etot=_fill_scalar(fld.etot, grid, depth),
            depth=depth,
        )
    if vector:
        return _fill_vector(fld, grid, depth)
    return _fill_scalar(fld, grid, depth)


# ---------------------------------------------------------------------------
# discrete calculus


def gradient(fld: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-cell centered gradient of a ghosted scalar field, shape (dim, *cells)."""
    fld = np.asarray(fld, dtype=float)
    depth = ghost_depth(fld, grid)
    out = np.empty((grid.dim, *grid.cells))
    for ax in range(grid.dim):
        out[ax] = (
            _shifted(fld, grid, depth, ax, +1) - _shifted(fld, grid, depth, ax, -1)
        ) / (2.0 * grid.spacing[ax])
    return out


def divergence(fld: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-cell centered divergence of a ghosted vector field."""
    fld = np.asarray(fld, dtype=float)
    if fld.ndim != grid.dim + 1 or fld.shape[0] != grid.dim:
        raise UsageError(f"vector field must have shape (dim, ...), got {fld.shape}")
    depth = ghost_depth(fld, grid)
    out = np.zeros(grid.cells)
    for ax in range(grid.dim):
        out += (
            _shifted(fld[ax], grid, depth, ax, +1) - _shifted(fld[ax], grid, depth, ax, -1)
        ) / (2.0 * grid.spacing[ax])
    return out


def flux_divergence(coef: np.ndarray, fld: np.ndarray, grid: Grid) -> np.ndarray:
    """div(k grad f) by conservative face-flux differencing.

    Both the cell-centered coefficient and the field must be ghosted; the
    face coefficient is the arithmetic mean of the two adjacent cells. Exact
    zero for affine f with constant k.
    """
    coef = np.asarray(coef, dtype=float)
    fld = np.asarray(fld, dtype=float)
    dc, df = ghost_depth(coef, grid), ghost_depth(fld, grid)
    out = np.zeros(grid.cells)
    for ax in range(grid.dim):
        dx = grid.spacing[ax]
        f0 = _shifted(fld, grid, df, ax, 0)
        fp = _shifted(fld, grid, df, ax, +1)
        fm = _shifted(fld, grid, df, ax, -1)
        k0 = _shifted(coef, grid, dc, ax, 0)
        kp = _shifted(coef, grid, dc, ax, +1)
        km = _shifted(coef, grid, dc, ax, -1)
        flux_hi = 0.5 * (k0 + kp) * (fp - f0) / dx
        flux_lo = 0.5 * (km + k0) * (f0 - fm) / dx
        out += (flux_hi - flux_lo) / dx
    return out


# ---------------------------------------------------------------------------
# norms, integrals, accumulators

_NORM_ORDERS = (2.0, 4.0, 6.0, math.inf)


def _magnitude(fld, grid):
    fld = np.asarray(fld, dtype=float)
    if fld.shape == grid.cells:
        return np.abs(fld)
    if fld.shape == (grid.dim, *grid.cells):
        return np.sqrt(np.sum(fld * fld, axis=0))
    raise UsageError(f"expected interior scalar or vector field, got shape {fld.shape}")


def norm(fld, grid: Grid, p) -> float:
    """Cell-average weighted L^p norm, p in {2, 4, 6, inf}.

    Vector fields (shape (dim, *cells)) are reduced to their pointwise
    Euclidean magnitude first.
    """
    p = float(p)
    if p not in _NORM_ORDERS:
        raise UsageError(f"norm order must be one of {{2, 4, 6, inf}}, got {p}")
    mag = _magnitude(fld, grid)
    if math.isinf(p):
        return float(np.max(mag)) if mag.size else 0.0
    return float((np.sum(mag ** p) * grid.cell_volume) ** (1.0 / p))


def integrate(fld, grid: Grid) -> float:
    """Midpoint-rule integral of an interior cell-average field over the box."""
    fld = np.asarray(fld, dtype=float)
    return float(np.sum(fld) * grid.cell_volume)


def inner(f, g, grid: Grid) -> float:
    """L^2 inner product; vector fields are contracted componentwise."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise UsageError(f"shape mismatch in inner product: {f.shape} vs {g.shape}")
    return float(np.sum(f * g) * grid.cell_volume)


class TrapezoidAccumulator:
    """Running trapezoid-rule integral of a sampled time series."""

    def __init__(self):
        self._t = None
        self._v = None
        self.total = 0.0

    def add(self, t: float, value: float) -> float:
        t = float(t)
        value = float(value)
        if self._t is not None:
            dt = t - self._t
            if dt < 0.0:
                raise UsageError(f"time samples must be nondecreasing, got {self._t} -> {t}")
            self.total += 0.5 * dt * (self._v + value)
        self._t, self._v = t, value
        return self.total


# ---------------------------------------------------------------------------
# serialization

_SNAPSHOT_MAGIC = "nsflab-snapshot 1"


def write_snapshot(path, grid: Grid, time: float, fields: dict) -> None:
    """Write fields to one file: ASCII header, then flat little-endian float64.

    Scalar fields must have the interior shape; vector fields the interior
    shape with a leading component axis.
    """
    entries = []
    for name, arr in fields.items():
        if " " in name or "=" in name or "\n" in name:
            raise UsageError(f"field name {name!r} must not contain spaces or '='")
        arr = np.asarray(arr, dtype=float)
        if arr.shape == grid.cells:
            comp = 1
        elif arr.shape == (grid.dim, *grid.cells):
            comp = grid.dim
        else:
            raise UsageError(f"field {name!r} has shape {arr.shape}, not an interior field")
        entries.append((name, comp, arr))
    lines = [
        _SNAPSHOT_MAGIC,
        f"dim {grid.dim}",
        "extents " + " ".join(repr(v) for v in grid.extents),
        "cells " + " ".join(str(v) for v in grid.cells),
        "bc " + " ".join(grid.bc),
        f"time {float(time)!r}",
        "fields " + " ".join(f"{name}={comp}" for name, comp, _ in entries),
        "end",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        for _, _, arr in entries:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    """Read a snapshot file back into (grid, time, fields dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    marker = b"\nend\n"
    idx = blob.find(marker)
    if not blob.startswith(_SNAPSHOT_MAGIC.encode("ascii")) or idx < 0:
        raise UsageError(f"{path} is not a field snapshot")
    header = blob[:idx].decode("ascii").splitlines()
    payload = blob[idx + len(marker):]
    meta = {}
    for line in header[1:]:
        key, _, rest = line.partition(" ")
        meta[key] = rest
    grid = Grid(
        extents=tuple(float(v) for v in meta["extents"].split()),
        cells=tuple(int(v) for v in meta["cells"].split()),
        bc=tuple(meta["bc"].split()),
    )
    time = float(meta["time"])
    fields = {}
    offset = 0
    for item in meta["fields"].split():
        name, _, comp = item.partition("=")
        comp = int(comp)
        shape = grid.cells if comp == 1 else (comp, *grid.cells)
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        fields[name] = arr.reshape(shape).copy()
    return grid, time, fields


def write_profile_csv(path, grid: Grid, fields: dict) -> None:
    """CSV export of 1-D profiles: cell-center x plus one column per field."""
    if grid.dim != 1:
        raise UsageError("CSV profiles are defined for 1-D grids")
    x = cell_centers(grid)[0]
    cols = [("x", x)]
    for name, arr in fields.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape == (1, *grid.cells):
            arr = arr[0]
        if arr.shape != grid.cells:
            raise UsageError(f"profile column {name!r} has shape {arr.shape}")
        cols.append((name, arr))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(name for name, _ in cols) + "\n")
        for i in range(grid.cells[0]):
            fh.write(",".join(repr(float(arr[i])) for _, arr in cols) + "\n")
