import math

import numpy as np
import pytest

from momc_uq.errors import DegenerateInputError, PositivityError
from momc_uq.mesh import Grid1D
from momc_uq.models import (BloodFlow, BloodFlowElastic, Burgers, JinXin,
                            ShallowWater, elastic_pressure, equilibrium_project,
                            initial_condition, max_wave_speed, physical_flux,
                            reduced_model_of, relaxation_source, tube_law_slope)


def col(*vals):
    return np.array([[v] for v in vals], dtype=float)


# fluxes ---------------------------------------------------------------------

def test_burgers_flux():
    assert physical_flux(Burgers(), col(2.0))[0, 0] == 2.0


def test_jinxin_flux():
    m = JinXin(a=2.0)
    f = m.physical_flux(col(1.0, 3.0), m.grid_fields(Grid1D(-5, 5, 4), [0.5]))
    # fields use the auto speed; evaluate with an explicit a = 2 instead
    from momc_uq.models import ScalarFields
    f = m.physical_flux(col(1.0, 3.0), ScalarFields(a=2.0))
    assert f[:, 0] == pytest.approx([3.0, 4.0])


def test_bloodflow_flux():
    m = BloodFlow()
    f = m.physical_flux(col(1.0, 2.0, 0.0), None)
    assert f[:, 0] == pytest.approx([2.0, 4.0, 0.0])


def test_flux_rejects_nonpositive_area():
    with pytest.raises(PositivityError):
        physical_flux(BloodFlow(), col(-1.0, 2.0, 0.0))


# quasilinear terms ----------------------------------------------------------

def _bf_fields(n=8):
    m = BloodFlow()
    return m, m.grid_fields(Grid1D(0.0, 1.0, n), np.array([0.0]))


def test_swe_constant_surface_no_momentum_increment():
    m = ShallowWater()
    U = np.vstack([np.ones(8), np.full(8, 0.3), np.zeros(8)])
    face_means = np.vstack([np.ones(9), np.full(9, 0.3), np.zeros(9)])
    inc = m.quasilinear_increment(U, face_means, m.grid_fields(None, None), 0.1)
    assert np.all(inc[1] == 0.0)


def test_bloodflow_constant_pressure_no_momentum_increment():
    m, f = _bf_fields()
    U = np.vstack([np.full(8, 5e-4), np.full(8, 5e-5), np.full(8, 7e3)])
    face_means = np.repeat(U[:, :1], 9, axis=1)
    inc = m.quasilinear_increment(U, face_means, f, 0.125)
    assert np.all(inc[1] == 0.0)


def test_bloodflow_linear_flow_rate_pressure_increment():
    # finite-difference oracle on a 3-cell stencil: q linear with slope s
    # contributes -(E0/Re) G(A) s to dp/dt
    m, f = _bf_fields(n=8)
    dx = 0.125
    slope = 3.0e-4
    x_faces = np.arange(9) * dx
    A = np.full(8, 5.0e-4)
    U = np.vstack([A, 5e-5 + slope * (np.arange(8) + 0.5) * dx, np.full(8, 7e3)])
    face_means = np.vstack([np.full(9, 5e-4), 5e-5 + slope * x_faces, np.full(9, 7e3)])
    inc = m.quasilinear_increment(U, face_means, f, dx)
    oracle = -(f.E0 / f.re) * tube_law_slope(A, f) * slope
    assert inc[2] == pytest.approx(oracle, rel=1e-12)


# relaxation sources ---------------------------------------------------------

def test_jinxin_source_vanishes_on_equilibrium():
    m = JinXin(eps=1e-3)
    from momc_uq.models import ScalarFields
    u = col(0.7, 0.5 * 0.7**2)
    S, inv = m.relaxation_source(u, ScalarFields(a=1.0, eps=1e-3))
    assert np.all(S == 0.0)
    assert inv == pytest.approx(1e3)


def test_jinxin_source_hand_value():
    m = JinXin()
    from momc_uq.models import ScalarFields
    S, _ = m.relaxation_source(col(2.0, 5.0), ScalarFields(a=3.0, eps=1.0))
    assert S[1, 0] == pytest.approx(3.0)  # 5 - 2^2/2


def test_bloodflow_source_vanishes_on_tube_law():
    m, f = _bf_fields()
    U = np.vstack([f.A0 * 1.1, np.full(8, 5e-5), np.zeros(8)])
    U[2] = elastic_pressure(U[0], f)
    S, _ = m.relaxation_source(U, f)
    assert np.all(S == 0.0)


def test_source_zero_for_nonrelaxing_models():
    S, inv = relaxation_source(Burgers(), col(1.0))
    assert np.all(S == 0.0) and inv == 0.0


# wave speeds ----------------------------------------------------------------

def test_burgers_speed():
    assert max_wave_speed(Burgers(), col(-3.0))[0] == 3.0


def test_swe_rest_speed():
    m = ShallowWater(froude=1.0)
    f = m.grid_fields(None, None)
    s = m.max_wave_speed(np.vstack([np.ones(4), np.zeros(4), np.zeros(4)]), f)
    assert s == pytest.approx(np.ones(4))


def test_bloodflow_rest_speed_matches_sound_speed():
    m, f = _bf_fields()
    A = f.A0.copy()
    U = np.vstack([A, np.zeros(8), elastic_pressure(A, f)])
    s = m.max_wave_speed(U, f)
    oracle = np.sqrt((f.E0 / f.re) * tube_law_slope(A, f) * A / f.rho)
    assert s == pytest.approx(oracle, rel=1e-14)


@pytest.mark.parametrize("kind", ["jinxin", "swe", "bloodflow", "elastic"])
def test_speed_bounds_numerical_spectral_radius(kind, rng):
    grid = Grid1D(0.0, 1.0, 4)
    n_states = 1000
    if kind == "jinxin":
        model = JinXin(a=1.3)
        from momc_uq.models import ScalarFields
        fields = ScalarFields(a=1.3, eps=1e-2)
        U = np.vstack([rng.uniform(-1, 1, n_states), rng.uniform(-1, 1, n_states)])
    elif kind == "swe":
        model = ShallowWater(froude=0.7)
        fields = model.grid_fields(None, None)
        h = rng.uniform(0.2, 2.0, n_states)
        U = np.vstack([h, h * rng.uniform(-1, 1, n_states), np.zeros(n_states)])
    else:
        full = BloodFlow()
        wall = full.grid_fields(Grid1D(0, 1, 4), np.array([0.1]))
        idx = rng.integers(0, 4, n_states)
        from dataclasses import replace
        fields = replace(wall, A0=wall.A0[idx], p0=wall.p0[idx], E0=wall.E0[idx],
                         Einf=wall.Einf[idx], tau=wall.tau[idx])
        A = rng.uniform(2e-4, 9e-4, n_states)
        q = A * rng.uniform(-0.5, 0.5, n_states)
        if kind == "bloodflow":
            model = full
            U = np.vstack([A, q, rng.uniform(4e3, 2e4, n_states)])
        else:
            model = BloodFlowElastic()
            U = np.vstack([A, q])
    M = model.quasilinear_matrix(U, fields)
    radius = np.max(np.abs(np.linalg.eigvals(M)), axis=1)
    speed = model.max_wave_speed(U, fields)
    assert np.all(speed >= radius - 1e-10 * (1 + radius))


# equilibrium projection -----------------------------------------------------

def test_jinxin_projection_hand_value():
    m = JinXin()
    from momc_uq.models import ScalarFields
    out = equilibrium_project(m, col(1.0, 7.0), ScalarFields(a=1.0, eps=1.0))
    assert out[:, 0] == pytest.approx([1.0, 0.5])


def test_projection_idempotent():
    m, f = _bf_fields()
    U = np.vstack([f.A0 * 0.9, np.full(8, 1e-4), np.full(8, 2e4)])
    once = equilibrium_project(m, U, f)
    twice = equilibrium_project(m, once, f)
    assert np.array_equal(once, twice)


def test_bloodflow_projection_at_rest_area():
    m, f = _bf_fields()
    U = np.vstack([f.A0.copy(), np.zeros(8), np.full(8, 1.0)])
    out = equilibrium_project(m, U, f)
    assert out[2] == pytest.approx(f.p0, rel=1e-14)


def test_source_of_projection_vanishes_for_random_states(rng):
    m, f = _bf_fields()
    for _ in range(20):
        U = np.vstack([rng.uniform(2e-4, 9e-4, 8), rng.uniform(-1e-4, 1e-4, 8),
                       rng.uniform(0, 3e4, 8)])
        S, _ = m.relaxation_source(equilibrium_project(m, U, f), f)
        assert np.all(S == 0.0)


# reduced models -------------------------------------------------------------

def test_jinxin_reduces_to_burgers():
    assert isinstance(reduced_model_of(JinXin()), Burgers)


def test_bloodflow_reduces_to_elastic_with_matching_params():
    m = BloodFlow(test=2, rho=900.0, h0=0.002)
    r = reduced_model_of(m)
    assert isinstance(r, BloodFlowElastic)
    assert (r.test, r.rho, r.h0) == (2, 900.0, 0.002)


def test_burgers_has_no_reduced_form():
    with pytest.raises(ValueError):
        reduced_model_of(Burgers())


def test_reduction_commutes_with_initial_condition():
    grid = Grid1D(0.0, 1.0, 16)
    z = np.array([0.4])
    m = BloodFlow(test=2)
    r = reduced_model_of(m)
    full_ic = initial_condition(m, grid, z).values
    red_ic = initial_condition(r, grid, z).values
    assert np.array_equal(full_ic[:2], red_ic)
    lifted = m.lift_reduced(red_ic, r.grid_fields(grid, z))
    projected = equilibrium_project(m, full_ic, m.grid_fields(grid, z))
    assert lifted == pytest.approx(projected, rel=1e-14)


def test_jinxin_lift_is_equilibrium():
    m = JinXin()
    u = np.array([[0.3, -0.2, 0.9, 0.0]])
    lifted = m.lift_reduced(u, None)
    assert lifted[1] == pytest.approx(0.5 * u[0] ** 2)


# initial conditions ---------------------------------------------------------

def test_burgers_gaussian_peak_value():
    m = Burgers()
    u = m.point_state(np.array([0.0]), np.array([1.0]))
    assert u[0, 0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)


def test_swe_double_gaussian_value():
    m = ShallowWater()
    state = m.point_state(np.array([10.0]), np.array([0.0]))
    assert state[0, 0] == pytest.approx(1.01, abs=1e-12)
    assert state[1, 0] == 0.0


def test_bloodflow_test1_values_quarter_period():
    m = BloodFlow(test=1)
    state = m.point_state(np.array([0.25]), np.array([0.0]))
    assert state[2, 0] == pytest.approx(20000.0)
    assert state[0, 0] == pytest.approx(6.0e-4)


def test_burgers_degenerate_width_rejected():
    with pytest.raises(DegenerateInputError):
        initial_condition(Burgers(), Grid1D(-5, 5, 10), np.array([0.0]))


def test_initial_condition_midpoint_matches_centers():
    m = Burgers()
    grid = Grid1D(-5.0, 5.0, 11)
    field = initial_condition(m, grid, np.array([0.8]))
    assert field.values == pytest.approx(m.point_state(grid.cell_centers(),
                                                       np.array([0.8])))


def test_gauss3_average_beats_midpoint_for_curvature():
    # cell-average oracle by dense quadrature
    m = Burgers()
    grid = Grid1D(-1.0, 1.0, 8)
    z = np.array([0.5])
    exact = np.empty(grid.n_cells)
    for i in range(grid.n_cells):
        xs = np.linspace(grid.x_min + i * grid.dx, grid.x_min + (i + 1) * grid.dx,
                         2001)
        exact[i] = np.trapezoid(m.point_state(xs, z)[0], xs) / grid.dx
    mid = initial_condition(m, grid, z, quad="midpoint").values[0]
    g3 = initial_condition(m, grid, z, quad="gauss3").values[0]
    assert np.max(np.abs(g3 - exact)) < 1e-3 * np.max(np.abs(mid - exact))


def test_jinxin_subcharacteristic_guard():
    m = JinXin(a=0.01)  # far below max|u0|
    with pytest.raises(PositivityError):
        m.grid_fields(Grid1D(-5, 5, 64), np.array([0.5]))
