"""Grid machinery: ghosts, stencils, norms, serialization."""

import math

import numpy as np
import pytest

from nsflab import grid_fields as gf
from nsflab.errors import PositivityError, UsageError

WALL = gf.Grid.line(1.0, 32)
PER = gf.Grid.line(1.0, 32, bc="periodic")
BOX = gf.Grid.box((1.0, 2.0), (16, 24))


def test_grid_validation():
    with pytest.raises(UsageError):
        gf.Grid.line(1.0, 4)
    with pytest.raises(UsageError):
        gf.Grid.line(-1.0, 32)
    with pytest.raises(UsageError):
        gf.Grid.line(1.0, 32, bc="outflow")
    with pytest.raises(UsageError):
        gf.Grid(extents=(1.0, 1.0, 1.0), cells=(8, 8, 8), bc=("periodic",) * 3)
    assert BOX.spacing == (1.0 / 16, 2.0 / 24)
    assert WALL.cell_volume == pytest.approx(1.0 / 32)


def test_cell_centers():
    x = gf.cell_centers(WALL)[0]
    assert x[0] == pytest.approx(0.5 / 32)
    assert x[-1] == pytest.approx(1.0 - 0.5 / 32)
    X, Y = gf.mesh(BOX)
    assert X.shape == (16, 24) and Y.shape == (16, 24)
    assert Y[0, 0] == pytest.approx(2.0 / 24 / 2)


# ---------------------------------------------------------------------------
# ghosts


def test_ghost_odd_mirror_normal_velocity():
    u = np.full((1, 32), 3.5)
    ug = gf.fill_ghosts_slip(u, WALL, vector=True)
    assert ug.shape == (1, 34)
    assert ug[0, 0] == -3.5  # ghost = -(first interior)
    assert ug[0, -1] == -3.5


def test_ghost_even_mirror_scalar():
    theta = np.linspace(1.0, 2.0, 32)
    tg = gf.fill_ghosts_slip(theta, WALL)
    assert tg[0] == theta[0]
    assert tg[-1] == theta[-1]


def test_ghost_periodic_wrap():
    f = np.arange(32.0)
    fg = gf.fill_ghosts_slip(f, PER, depth=2)
    assert fg[0] == 30.0 and fg[1] == 31.0
    assert fg[-2] == 0.0 and fg[-1] == 1.0


def test_ghost_idempotent():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((16, 24))
    once = gf.fill_ghosts_slip(f, BOX, depth=2)
    twice = gf.fill_ghosts_slip(once, BOX, depth=2)
    assert np.array_equal(once, twice)
    u = rng.standard_normal((2, 16, 24))
    onceu = gf.fill_ghosts_slip(u, BOX, depth=2, vector=True)
    assert np.array_equal(onceu, gf.fill_ghosts_slip(onceu, BOX, depth=2, vector=True))


def test_ghost_state_parities():
    rng = np.random.default_rng(1)
    rho = 1.0 + 0.1 * rng.random((16, 24))
    mom = 0.1 * rng.standard_normal((2, 16, 24))
    etot = 2.0 + rng.random((16, 24))
    st = gf.FluidState(rho, mom, etot)
    g = gf.fill_ghosts_slip(st, BOX, depth=2)
    assert g.rho[1, 4] == rho[0, 2] and g.rho[0, 4] == rho[1, 2]
    assert g.mom[0, 1, 5] == -mom[0, 0, 3]  # normal momentum odd across x wall
    assert g.mom[1, 1, 5] == mom[1, 0, 3]  # tangential momentum even
    assert g.etot[3, 1] == etot[1, 0]


def test_wall_face_heat_flux_vanishes():
    # centered face flux at the wall: -kappa(theta_face)(ghost - interior)/dx
    theta = 1.0 + np.random.default_rng(2).random(32)
    tg = gf.fill_ghosts_slip(theta, WALL)
    dx = WALL.spacing[0]
    flux_left = -(tg[1] - tg[0]) / dx
    flux_right = -(tg[-1] - tg[-2]) / dx
    assert flux_left == 0.0 and flux_right == 0.0


def test_unfilled_ghosts_rejected():
    f = np.zeros(32)
    with pytest.raises(UsageError):
        gf.gradient(f, WALL)
    with pytest.raises(UsageError):
        gf.divergence(np.zeros((1, 32)), WALL)


# ---------------------------------------------------------------------------
# calculus


def test_gradient_constant_zero():
    f = gf.fill_ghosts_slip(np.full((16, 24), 5.0), BOX)
    assert np.all(gf.gradient(f, BOX) == 0.0)


def test_gradient_affine_exact():
    # ghost values extend the affine field exactly (stencil exactness)
    xg = gf.ghosted_centers(WALL, 1)[0]
    g = gf.gradient(3.0 * xg, WALL)
    assert np.max(np.abs(g - 3.0)) < 1e-13


def test_gradient_second_order_smooth():
    errs = []
    for n in (32, 64):
        grid = gf.Grid.line(1.0, n, bc="periodic")
        f = gf.fill_ghosts_slip(np.sin(2 * np.pi * gf.cell_centers(grid)[0]), grid)
        exact = 2 * np.pi * np.cos(2 * np.pi * gf.cell_centers(grid)[0])
        errs.append(np.max(np.abs(gf.gradient(f, grid)[0] - exact)))
    order = math.log2(errs[0] / errs[1])
    assert order > 1.9


def test_gradient_second_order_wall_compatible():
    # cos(pi x / L) is even about both walls, so mirror ghosts are exact
    errs = []
    for n in (32, 64):
        grid = gf.Grid.line(1.0, n)
        x = gf.cell_centers(grid)[0]
        f = gf.fill_ghosts_slip(np.cos(np.pi * x), grid)
        exact = -np.pi * np.sin(np.pi * x)
        errs.append(np.max(np.abs(gf.gradient(f, grid)[0] - exact)))
    assert math.log2(errs[0] / errs[1]) > 1.9


def test_divergence_affine_exact():
    xg, yg = gf.ghosted_centers(BOX, 1)
    u = np.stack([2.0 * xg[:, None] + 0.0 * yg[None, :], -1.0 * yg[None, :] + 0.0 * xg[:, None]])
    div = gf.divergence(u, BOX)
    assert np.max(np.abs(div - 1.0)) < 1e-12


def test_flux_divergence_affine_zero():
    xg = gf.ghosted_centers(WALL, 1)[0]
    k = np.full_like(xg, 2.0)
    out = gf.flux_divergence(k, 3.0 * xg + 1.0, WALL)
    assert np.max(np.abs(out)) < 1e-12


def test_flux_divergence_second_order():
    errs = []
    for n in (64, 128):
        grid = gf.Grid.line(1.0, n, bc="periodic")
        x = gf.cell_centers(grid)[0]
        f = gf.fill_ghosts_slip(np.sin(2 * np.pi * x), grid)
        k = gf.fill_ghosts_slip(np.full(n, 1.0), grid)
        exact = -(2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
        errs.append(np.max(np.abs(gf.flux_divergence(k, f, grid) - exact)))
    assert math.log2(errs[0] / errs[1]) > 1.9


# ---------------------------------------------------------------------------
# norms and integrals


def test_norm_indicator():
    grid = gf.Grid.box((1.0, 2.0), (16, 16))
    ones = np.ones((16, 16))
    for p in (2, 4, 6):
        assert gf.norm(ones, grid, p) == pytest.approx(2.0 ** (1.0 / p), rel=1e-14)
    assert gf.norm(ones, grid, math.inf) == 1.0


def test_norm_zero_field():
    assert gf.norm(np.zeros(32), WALL, 4) == 0.0
    assert gf.norm(np.zeros((1, 32)), WALL, math.inf) == 0.0


def test_norm_rejects_other_orders():
    with pytest.raises(UsageError):
        gf.norm(np.zeros(32), WALL, 3)


def test_interpolation_inequality_random_fields():
    rng = np.random.default_rng(42)
    for _ in range(100):
        u = rng.standard_normal((1, 32))
        lhs = gf.norm(u, WALL, 4)
        rhs = gf.norm(u, WALL, 6) ** 0.75 * gf.norm(u, WALL, 2) ** 0.25
        assert lhs <= rhs * (1.0 + 1e-12)


def test_integrate_and_inner():
    x = gf.cell_centers(WALL)[0]
    assert gf.integrate(np.ones(32), WALL) == pytest.approx(1.0, rel=1e-14)
    # midpoint rule is exact for affine integrands
    assert gf.integrate(x, WALL) == pytest.approx(0.5, rel=1e-13)
    assert gf.inner(np.ones(32), x, WALL) == pytest.approx(0.5, rel=1e-13)


def test_trapezoid_accumulator():
    acc = gf.TrapezoidAccumulator()
    ts = np.linspace(0.0, 1.0, 11)
    for t in ts:
        acc.add(t, float(t ** 2))
    assert acc.total == pytest.approx(np.trapezoid(ts ** 2, ts), rel=1e-14)
    with pytest.raises(UsageError):
        acc.add(0.5, 1.0)


# ---------------------------------------------------------------------------
# state containers


def test_fluid_state_validation():
    rho = np.ones(32)
    mom = np.zeros((1, 32))
    etot = np.full(32, 2.0)
    st = gf.FluidState(rho, mom, etot, time=0.25)
    assert st.time == 0.25
    assert np.all(st.velocity() == 0.0)
    with pytest.raises(PositivityError):
        gf.FluidState(-rho, mom, etot)
    with pytest.raises(PositivityError):
        gf.FluidState(rho, mom, np.full(32, np.nan))
    fast = mom.copy()
    fast[0, 0] = 10.0  # kinetic energy 50 > etot
    with pytest.raises(PositivityError):
        gf.FluidState(rho, fast, etot)
    with pytest.raises(UsageError):
        gf.FluidState(rho, np.zeros((2, 32)), etot)


def test_fluid_state_vacuum_cells():
    rho = np.ones(32)
    rho[3] = 0.0
    mom = np.zeros((1, 32))
    etot = np.ones(32)
    st = gf.FluidState(rho, mom, etot)
    assert st.velocity()[0, 3] == 0.0
    mom2 = mom.copy()
    mom2[0, 3] = 1.0
    with pytest.raises(PositivityError):
        gf.FluidState(rho, mom2, etot)


def test_reference_fields_positivity():
    shape = (16, 24)
    ok = gf.ReferenceFields(np.ones(shape), np.ones(shape), np.zeros((2, *shape)), time=1.0)
    assert ok.time == 1.0
    with pytest.raises(PositivityError):
        gf.ReferenceFields(np.zeros(shape), np.ones(shape), np.zeros((2, *shape)))
    with pytest.raises(PositivityError):
        gf.ReferenceFields(np.ones(shape), -np.ones(shape), np.zeros((2, *shape)))
    with pytest.raises(UsageError):
        gf.ReferenceFields(np.ones(shape), np.ones(shape), np.zeros((1, *shape)))


# ---------------------------------------------------------------------------
# serialization


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    fields = {
        "rho": 1.0 + rng.random((16, 24)),
        "mom": rng.standard_normal((2, 16, 24)),
        "etot": 2.0 + rng.random((16, 24)),
    }
    path = tmp_path / "snap.bin"
    gf.write_snapshot(path, BOX, 0.375, fields)
    grid2, time2, fields2 = gf.read_snapshot(path)
    assert grid2 == BOX
    assert time2 == 0.375
    for name in fields:
        assert np.array_equal(fields[name], fields2[name])


def test_snapshot_rejects_bad_shape(tmp_path):
    with pytest.raises(UsageError):
        gf.write_snapshot(tmp_path / "x.bin", BOX, 0.0, {"rho": np.zeros(7)})
    with pytest.raises(UsageError):
        gf.write_snapshot(tmp_path / "x.bin", BOX, 0.0, {"bad name": np.zeros((16, 24))})


def test_snapshot_rejects_foreign_file(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"not a snapshot")
    with pytest.raises(UsageError):
        gf.read_snapshot(p)


def test_profile_csv(tmp_path):
    path = tmp_path / "profile.csv"
    x = gf.cell_centers(WALL)[0]
    gf.write_profile_csv(path, WALL, {"rho": 1.0 + x, "u": np.zeros((1, 32))})
    lines = path.read_text().splitlines()
    assert lines[0] == "x,rho,u"
    assert len(lines) == 33
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == pytest.approx(x[0])
    assert first[1] == pytest.approx(1.0 + x[0])
    with pytest.raises(UsageError):
        gf.write_profile_csv(path, BOX, {"rho": np.ones((16, 24))})
