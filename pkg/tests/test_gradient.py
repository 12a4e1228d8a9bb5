import numpy as np
import pytest

from auxcell import checks, fem, homogenization, levelset, materials, velocity
from auxcell.errors import StaleSolutionError


def _state(mesh, phases, spec):
    mls = levelset.init_pattern(
        mesh, {"pattern": "circles", "rows": 2, "cols": 2, "radius": 0.16,
               "invert": True},
        {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.3})
    d1 = levelset.reinitialize(mesh, mls.phi1, 50)
    d2 = levelset.reinitialize(mesh, mls.phi2, 50)
    dmats = fem.material_field(mesh, d1, d2, phases)
    sols = fem.solve_cell_problems(mesh, dmats, rtol=1e-11)
    ah = homogenization.homogenized_tensor(mesh, dmats, sols)
    return d1, d2, sols, ah


@pytest.fixture(scope="module")
def spec():
    return homogenization.ObjectiveSpec(
        {"1111": 0.1, "1122": -0.1, "2222": 0.1},
        {"1111": 1.0, "1122": 30.0, "2222": 1.0})


def test_directional_derivative_both_sets(spec):
    # the band-integrated sensitivity must match a central finite
    # difference of the full pipeline within 5% for both level sets
    errors = checks.gradient_check_suite(n=30, trials=4, seed=3)
    assert errors.max() <= 0.05


def test_directional_derivative_without_multipliers(spec):
    errors = checks.gradient_check_suite(n=30, trials=2, seed=1,
                                         with_multipliers=False)
    assert errors.max() <= 0.05


def test_uniform_phases_zero_velocity(mesh16, spec):
    # all phases identical -> a_star vanishes -> no elastic velocity
    t = materials.isotropic_tensor(1.0, 0.3)
    phases = materials.PhaseSet((t, t, t, t), eps=2 * mesh16.dx)
    d1, d2, sols, ah = _state(mesh16, phases, spec)
    g = velocity.elastic_integrand(1, mesh16, d1, d2, phases, sols, ah, spec)
    assert np.abs(g).max() < 1e-12
    theta = velocity.extend_velocity(mesh16, g, d1, phases, 4 * mesh16.dx)
    assert np.abs(theta).max() < 1e-10


def test_exact_target_zero_elastic_velocity(mesh16, stock_phases):
    # targets set to the computed A^H -> mismatch factors vanish
    base = homogenization.ObjectiveSpec(
        {"1111": 0.1, "1122": -0.1, "2222": 0.1},
        {"1111": 1.0, "1122": 30.0, "2222": 1.0})
    d1, d2, sols, ah = _state(mesh16, stock_phases, base)
    spec0 = homogenization.ObjectiveSpec(
        {k: ah.entry(k) for k in base.targets}, dict(base.weights))
    g = velocity.elastic_integrand(1, mesh16, d1, d2, stock_phases, sols,
                                   ah, spec0)
    assert np.abs(g).max() < 1e-12


def test_stale_solutions_rejected(mesh16, stock_phases, spec):
    d1, d2, sols, ah = _state(mesh16, stock_phases, spec)
    with pytest.raises(StaleSolutionError):
        velocity.elastic_integrand(1, mesh16, d1 + 0.05, d2, stock_phases,
                                   sols, ah, spec)


def test_extension_conserves_source_integral(mesh16, stock_phases, rng):
    # testing the weak form with w = 1: int theta = int g h'(d) |grad d|
    mls = levelset.init_pattern(
        mesh16, {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.3},
        {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.2})
    d = levelset.reinitialize(mesh16, mls.phi1, 50)
    g_elem = rng.normal(size=mesh16.n_elements)
    theta = velocity.extend_velocity(mesh16, g_elem, d, stock_phases,
                                     4 * mesh16.dx)
    d_bar = mesh16.element_values(d)
    grad_d = np.linalg.norm(mesh16.element_gradients(d), axis=1)
    src = g_elem * materials.heaviside_derivative(
        d_bar, stock_phases.eps) * grad_d
    lhs = float(mesh16.dof_weight @ mesh16.restrict(theta))
    rhs = float(np.sum(mesh16.areas * src))
    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-10)


def test_extension_linear_in_source(mesh16, stock_phases, rng):
    mls = levelset.init_pattern(
        mesh16, {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.3},
        {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.2})
    d = levelset.reinitialize(mesh16, mls.phi1, 50)
    g = rng.normal(size=mesh16.n_elements)
    t1 = velocity.extend_velocity(mesh16, g, d, stock_phases, 4 * mesh16.dx)
    t2 = velocity.extend_velocity(mesh16, 2 * g, d, stock_phases,
                                  4 * mesh16.dx)
    assert np.allclose(t2, 2 * t1, atol=1e-8)


def test_extension_alpha_flattens(mesh16, stock_phases):
    # a larger smoothing length spreads the same band source wider and
    # lowers its peak
    mls = levelset.init_pattern(
        mesh16, {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.3},
        {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.2})
    d = levelset.reinitialize(mesh16, mls.phi1, 50)
    g = np.ones(mesh16.n_elements)
    sharp = velocity.extend_velocity(mesh16, g, d, stock_phases,
                                     1 * mesh16.dx)
    smooth = velocity.extend_velocity(mesh16, g, d, stock_phases,
                                      8 * mesh16.dx)
    assert smooth.max() < sharp.max()
    far = np.abs(d) > 0.35
    assert np.abs(smooth[far]).mean() > np.abs(sharp[far]).mean()


def test_constraint_integrand_matches_h_star(mesh16, stock_phases):
    d2 = 0.3 * np.ones(mesh16.n_nodes)
    l_eff = np.array([0.5, 0.0, -0.25, 0.0])
    g = velocity.constraint_integrand(1, mesh16, None, d2, stock_phases,
                                      l_eff)
    expect = -materials.h_star(0.3, l_eff, stock_phases.eps, which=1)
    assert np.allclose(g, expect)
