import numpy as np
import pytest

from auxcell import fem, homogenization, materials
from auxcell.errors import ConfigError, DegenerateTensorError
from auxcell.homogenization import (ObjectiveSpec, apparent_poisson,
                                    homogenized_tensor, objective,
                                    volume_averaged_tensor)


def laminate_oracle(m1, m2, f1):
    """Rank-1 laminate tensor with layer normal e_y, solved from first
    principles: per macroscopic strain E impose equal in-plane strains
    (e11) and equal tractions (s22, s12) across the interface, solve the
    2x2 interface system for the layer strains, then average stress.

    Deliberately independent of the Backus-style formula in
    auxcell.checks (different derivation route, same physics).
    """
    m1 = np.asarray(m1, float)
    m2 = np.asarray(m2, float)
    f2 = 1.0 - f1
    ah = np.zeros((3, 3))
    for col, E in enumerate(np.eye(3)):
        # strains per layer: e_i = E + a_i * n-modes, with the two free
        # jump amplitudes (b22, b12) only in layer strains' (22, 12)
        # components, volume-average of jumps zero.
        # e1 = E + f2*[0, b2, b3], e2 = E - f1*[0, b2, b3]
        # traction continuity: rows (1, 2) of m1 e1 = m2 e2
        A = np.zeros((2, 2))
        rhs = np.zeros(2)
        for r, row in enumerate((1, 2)):
            for c, colmode in enumerate((1, 2)):
                A[r, c] = f2 * m1[row, colmode] + f1 * m2[row, colmode]
            rhs[r] = (m2[row] - m1[row]) @ E
        b = np.linalg.solve(A, rhs)
        e1 = E.copy()
        e1[1] += f2 * b[0]
        e1[2] += f2 * b[1]
        e2 = E.copy()
        e2[1] -= f1 * b[0]
        e2[2] -= f1 * b[1]
        stress = f1 * (m1 @ e1) + f2 * (m2 @ e2)
        ah[:, col] = stress
    return 0.5 * (ah + ah.T)


def test_laminate_oracles_agree():
    # two independently derived closed forms must coincide
    from auxcell import checks
    m1 = materials.isotropic_tensor(0.91, 0.3).m
    m2 = materials.isotropic_tensor(1.82, 0.3).m
    for f in (0.5, 0.3, 0.85):
        a = laminate_oracle(m1, m2, f)
        b = checks.laminate_tensor(m1, m2, f)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_uniform_cell_tensor(mesh20):
    t = materials.isotropic_tensor(0.91, 0.3)
    dmats = np.broadcast_to(t.m, (mesh20.n_elements, 3, 3)).copy()
    sols = fem.solve_cell_problems(mesh20, dmats)
    ah = homogenized_tensor(mesh20, dmats, sols)
    assert np.allclose(ah.m, t.m, rtol=1e-10, atol=1e-12)


def test_fem_matches_laminate_oracle():
    from auxcell import mesh as meshmod
    m = meshmod.build_mesh(40)
    t1 = materials.isotropic_tensor(0.91, 0.3)
    t2 = materials.isotropic_tensor(1.82, 0.3)
    phases = materials.PhaseSet((t1, t2, t2, t2), eps=1e-9)
    d1 = np.abs(m.nodes[:, 1]) - 0.25
    d2 = -np.ones(m.n_nodes)
    dmats = fem.material_field(m, d1, d2, phases)
    sols = fem.solve_cell_problems(m, dmats)
    ah = homogenized_tensor(m, dmats, sols)
    ref = laminate_oracle(t1.m, t2.m, 0.5)
    assert np.allclose(ah.m, ref, rtol=2e-2, atol=1e-8)


def test_major_symmetry_random_states(mesh16, stock_phases, rng):
    for _ in range(5):
        d1 = rng.normal(size=mesh16.n_nodes) * 0.05
        d2 = rng.normal(size=mesh16.n_nodes) * 0.05
        dmats = fem.material_field(mesh16, d1, d2, stock_phases)
        sols = fem.solve_cell_problems(mesh16, dmats)
        ah = homogenized_tensor(mesh16, dmats, sols)
        assert np.abs(ah.m - ah.m.T).max() <= 1e-12
        assert ah.is_positive_definite()


def test_voigt_bound(mesh16, stock_phases, rng):
    # energy of A^H on the probe strains never exceeds the volume average
    d1 = rng.normal(size=mesh16.n_nodes) * 0.05
    d2 = rng.normal(size=mesh16.n_nodes) * 0.05
    dmats = fem.material_field(mesh16, d1, d2, stock_phases)
    sols = fem.solve_cell_problems(mesh16, dmats)
    ah = homogenized_tensor(mesh16, dmats, sols)
    voigt = volume_averaged_tensor(mesh16, dmats)
    for probe in np.eye(3):
        assert ah.quad(probe) <= voigt.quad(probe) + 1e-12


def test_symmetric_vs_unsymmetric_form(mesh16, stock_phases, rng):
    # Galerkin identity: both A^H formulas agree within solver tolerance
    d1 = rng.normal(size=mesh16.n_nodes) * 0.05
    d2 = rng.normal(size=mesh16.n_nodes) * 0.05
    dmats = fem.material_field(mesh16, d1, d2, stock_phases)
    sols = fem.solve_cell_problems(mesh16, dmats, rtol=1e-11)
    ah = homogenized_tensor(mesh16, dmats, sols)
    strains = fem.corrected_strains(mesh16, sols)
    # contract with the bare probe strains E^{ml} (identity rows)
    unsym = np.einsum("pei,eij,e->pj", strains, dmats, mesh16.areas)
    assert np.allclose(unsym, ah.m, atol=1e-7)


def test_objective_hand_value():
    spec = ObjectiveSpec({"1111": 0.1, "1122": -0.1, "2222": 0.1},
                         {"1111": 1.0, "1122": 30.0, "2222": 1.0})
    m = np.array([[0.12, -0.09, 0.0], [-0.09, 0.12, 0.0], [0.0, 0.0, 0.1]])
    j = objective(materials.ElasticTensor4(m), spec)
    assert j == pytest.approx(0.0019, abs=1e-12)


def test_objective_exact_match_and_weight_scaling():
    spec = ObjectiveSpec({"1111": 0.1, "1122": -0.1, "2222": 0.1},
                         {"1111": 1.0, "1122": 30.0, "2222": 1.0})
    m = np.array([[0.1, -0.1, 0.0], [-0.1, 0.1, 0.0], [0.0, 0.0, 0.2]])
    assert objective(materials.ElasticTensor4(m), spec) == 0.0
    spec2 = ObjectiveSpec(spec.targets, {k: 2 * v
                                         for k, v in spec.weights.items()})
    m2 = np.array([[0.15, -0.1, 0.0], [-0.1, 0.1, 0.0], [0.0, 0.0, 0.2]])
    t = materials.ElasticTensor4(m2)
    assert objective(t, spec2) == pytest.approx(2 * objective(t, spec))


def test_objective_spec_validation():
    with pytest.raises(ConfigError):
        ObjectiveSpec({"1111": 0.1}, {"2222": 1.0})
    with pytest.raises(ConfigError):
        ObjectiveSpec({"1111": 0.1}, {"1111": -1.0})
    with pytest.raises(ConfigError):
        ObjectiveSpec({"1111": 0.1}, {"1111": 0.0})


def test_apparent_poisson_isotropic():
    t = materials.isotropic_tensor(0.91, 0.3)
    assert apparent_poisson(t) == pytest.approx(0.3, abs=1e-12)


def test_apparent_poisson_diagonal():
    m = np.diag([0.5, 0.5, 0.2])
    assert apparent_poisson(materials.ElasticTensor4(m)) == 0.0


def test_apparent_poisson_near_singular_auxetic():
    m = np.array([[0.1, -0.0999, 0.0], [-0.0999, 0.1, 0.0], [0.0, 0.0, 0.1]])
    nu = apparent_poisson(materials.ElasticTensor4(m))
    assert nu < -0.99


def test_apparent_poisson_singular_raises():
    m = np.array([[0.1, -0.1, 0.0], [-0.1, 0.1, 0.0], [0.0, 0.0, 0.1]])
    with pytest.raises(DegenerateTensorError):
        apparent_poisson(materials.ElasticTensor4(m))
