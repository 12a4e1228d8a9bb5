"""Self-contained verification routines (also exposed via the CLI).

These cross-check the FEM pipeline against closed forms and finite
differences; the test suite adds its own independently written oracles
on top.
"""

import numpy as np

from . import fem, homogenization, levelset, materials, velocity


def laminate_tensor(m1, m2, fraction=0.5):
    """Effective 3x3 tensor of a rank-1 laminate with layers normal to y.

    Classic lamination (Backus) averaging: the through-interface stress
    block (rows 22, 12) averages harmonically, the in-plane part
    arithmetically with the coupling correction.
    """
    a = [0]
    b = [1, 2]
    f = (fraction, 1.0 - fraction)
    mats = (np.asarray(m1, float), np.asarray(m2, float))

    def avg(fn):
        return sum(w * fn(m) for w, m in zip(f, mats))

    inv_bb = avg(lambda m: np.linalg.inv(m[np.ix_(b, b)]))
    cbb = np.linalg.inv(inv_bb)
    ab_ibb = avg(lambda m: m[np.ix_(a, b)] @ np.linalg.inv(m[np.ix_(b, b)]))
    caa = avg(lambda m: m[np.ix_(a, a)]
              - m[np.ix_(a, b)] @ np.linalg.inv(m[np.ix_(b, b)])
              @ m[np.ix_(b, a)]) + ab_ibb @ cbb @ ab_ibb.T
    cab = ab_ibb @ cbb

    out = np.zeros((3, 3))
    out[np.ix_(a, a)] = caa
    out[np.ix_(a, b)] = cab
    out[np.ix_(b, a)] = cab.T
    out[np.ix_(b, b)] = cbb
    return out


def uniform_cell_check(n=20, E=0.91, nu=0.3):
    """Homogenizing a single-phase cell must return that phase exactly."""
    m = _mesh(n)
    phases = materials.PhaseSet.from_moduli([E] * 4, [nu] * 4, eps=2 * m.dx)
    d = -np.ones(m.n_nodes)
    dmats = fem.material_field(m, d, d, phases)
    sols = fem.solve_cell_problems(m, dmats)
    ah = homogenization.homogenized_tensor(m, dmats, sols)
    ref = materials.isotropic_tensor(E, nu).m
    rel = np.abs(ah.m - ref).max() / np.abs(ref).max()
    chi_max = float(np.abs(sols.chi).max())
    return rel, chi_max


def laminate_check(n=100, fraction=0.5):
    """Sharp 50/50 laminate of the two stock materials vs the closed form.

    Returns the worst relative error over the 1111, 1122, 2222 entries.
    """
    m = _mesh(n)
    t1 = materials.isotropic_tensor(0.91, 0.3)
    t2 = materials.isotropic_tensor(1.82, 0.3)
    # near-sharp interface so the blend band does not bias the comparison
    phases = materials.PhaseSet((t1, t2, t2, t2), eps=1e-9)
    y = m.nodes[:, 1]
    half = fraction / 2.0
    d1 = np.abs(y) - half          # inside: |y| < half -> phase 1
    d2 = -np.ones(m.n_nodes)
    dmats = fem.material_field(m, d1, d2, phases)
    sols = fem.solve_cell_problems(m, dmats)
    ah = homogenization.homogenized_tensor(m, dmats, sols)
    ref = laminate_tensor(t1.m, t2.m, fraction)
    errs = {}
    for key in ("1111", "1122", "2222"):
        r, c = materials._pair_index(key)
        errs[key] = abs(ah.m[r, c] - ref[r, c]) / abs(ref[r, c])
    return max(errs.values()), errs


def lagrangian_value(mesh, d1, d2, phases, spec, l_eff, cg_tol=1e-11,
                     warm_start=None):
    """J minus the multiplier-weighted volumes, for gradient checks."""
    dmats = fem.material_field(mesh, d1, d2, phases)
    sols = fem.solve_cell_problems(mesh, dmats, rtol=cg_tol,
                                   warm_start=warm_start)
    ah = homogenization.homogenized_tensor(mesh, dmats, sols)
    j = homogenization.objective(ah, spec)
    vols = velocity.phase_volumes(mesh, d1, d2, phases)
    return j - float(np.dot(l_eff, vols)), sols, ah


def directional_derivative_check(mesh, phases, spec, d1, d2, l_eff,
                                 which, v_nodal, delta=1e-3, cg_tol=1e-11):
    """Compare the band-integrated sensitivity against a central finite
    difference of the full pipeline along a smooth normal perturbation.

    The perturbed set moves by d -> d + delta*w with w = -v*|grad d|
    (one forward-Euler step of normal transport with speed v), which is
    exactly the motion the interface sensitivity predicts.

    Returns (fd_slope, predicted_slope, relative_error).
    """
    base, sols, ah = lagrangian_value(mesh, d1, d2, phases, spec, l_eff,
                                      cg_tol)
    d_pert = d1 if which == 1 else d2
    w = -np.asarray(v_nodal) * levelset.gradient_norm(mesh, d_pert)

    g_elem = (velocity.elastic_integrand(which, mesh, d1, d2, phases, sols,
                                         ah, spec)
              + velocity.constraint_integrand(which, mesh, d1, d2, phases,
                                              l_eff))
    d_bar = mesh.element_values(d_pert)
    w_bar = mesh.element_values(w)
    predicted = float(np.sum(
        mesh.areas * materials.heaviside_derivative(d_bar, phases.eps)
        * g_elem * w_bar))

    def at(s):
        dp = d_pert + s * w
        a = (dp, d2) if which == 1 else (d1, dp)
        val, _, _ = lagrangian_value(mesh, a[0], a[1], phases, spec, l_eff,
                                     cg_tol, warm_start=sols)
        return val

    fd = (at(delta) - at(-delta)) / (2.0 * delta)
    denom = max(abs(fd), abs(predicted), 1e-14)
    return fd, predicted, abs(fd - predicted) / denom


def smooth_random_field(mesh, rng, modes=3, amplitude=1.0):
    """Periodic low-frequency random field used as a test velocity."""
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    v = np.zeros(mesh.n_nodes)
    for _ in range(modes):
        kx, ky = rng.integers(-2, 3, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        v += rng.normal() * np.cos(2 * np.pi * (kx * x + ky * y) + phase)
    vmax = np.abs(v).max()
    return amplitude * v / max(vmax, 1e-30)


def gradient_check_suite(n=50, trials=10, seed=0, delta=1e-3, with_multipliers=True):
    """Run several random smooth-perturbation checks; returns the errors."""
    m = _mesh(n)
    phases = materials.PhaseSet.from_moduli(
        (0.91, 0.0001, 1.82, 0.0001), (0.3,) * 4, eps=2 * m.dx)
    spec = homogenization.ObjectiveSpec(
        {"1111": 0.1, "1122": -0.1, "2222": 0.1},
        {"1111": 1.0, "1122": 30.0, "2222": 1.0})
    rng = np.random.default_rng(seed)
    mls = levelset.init_pattern(
        m, {"pattern": "circles", "rows": 2, "cols": 2, "radius": 0.16,
            "invert": True},
        {"pattern": "circles", "rows": 1, "cols": 1, "radius": 0.3})
    d1 = levelset.reinitialize(m, mls.phi1, 50)
    d2 = levelset.reinitialize(m, mls.phi2, 50)
    errors = []
    for t in range(trials):
        which = 1 + t % 2
        l_eff = (rng.uniform(-0.2, 0.2, size=4) if with_multipliers
                 else np.zeros(4))
        v = smooth_random_field(m, rng)
        _, _, rel = directional_derivative_check(
            m, phases, spec, d1, d2, l_eff, which, v, delta=delta)
        errors.append(rel)
    return np.array(errors)


def _mesh(n):
    from . import mesh as meshmod
    return meshmod.build_mesh(n)
