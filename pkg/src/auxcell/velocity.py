"""Descent velocities for the two level sets.

The interface velocity for set i combines the elastic sensitivity
(which couples to the *other* set's distance field through a_star) with
the volume-multiplier term h_star, both evaluated on the interface band
and then extended/regularized over the whole cell by a small Helmholtz
solve. No adjoint problem is ever solved: the objective is stationary
with respect to the correctors by Galerkin orthogonality.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fem, materials
from .errors import SolverError, StaleSolutionError

# consistent P1 mass matrix (unit area factor)
_M_LOCAL = np.array([[2.0, 1.0, 1.0],
                     [1.0, 2.0, 1.0],
                     [1.0, 1.0, 2.0]]) / 12.0


@dataclass
class ConstraintState:
    """Volume multipliers and penalties for the four phases."""

    multipliers: np.ndarray                  # (4,)
    penalties: np.ndarray                    # (4,)
    mode: str = "plain"                      # 'plain' | 'augmented'
    constrained: np.ndarray = field(
        default_factory=lambda: np.array([True, False, True, False]))
    volumes: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        self.multipliers = np.asarray(self.multipliers, dtype=float)
        self.penalties = np.asarray(self.penalties, dtype=float)
        self.constrained = np.asarray(self.constrained, dtype=bool)
        self.volumes = np.asarray(self.volumes, dtype=float)
        if self.mode not in ("plain", "augmented"):
            raise ValueError(f"unknown constraint mode {self.mode!r}")
        if self.mode == "augmented" and np.any(self.penalties <= 0):
            raise ValueError("augmented mode needs positive penalties")

    def copy(self):
        return ConstraintState(self.multipliers.copy(), self.penalties.copy(),
                               self.mode, self.constrained.copy(),
                               self.volumes.copy())

    def effective_multipliers(self, volumes, targets):
        """Multipliers as seen by the velocity; augmented mode folds the
        penalty term in (derivative of -l*C + beta/2*C^2)."""
        l = self.multipliers.copy()
        if self.mode == "augmented":
            c = np.asarray(volumes) - np.asarray(targets)
            l = l - self.penalties * c
        l[~self.constrained] = 0.0
        return l


def phase_volumes(mesh, d1, d2, phases):
    """Volumes of the four phases by barycentric quadrature of the densities."""
    d1e = mesh.element_values(d1)
    d2e = mesh.element_values(d2)
    dens = materials.phase_densities(d1e, d2e, phases)
    return np.array([float(np.sum(mesh.areas * rho)) for rho in dens])


def elastic_integrand(which, mesh, d1, d2, phases, solutions, ah, spec):
    """Elementwise elastic part of the interface sensitivity for one set.

    which = 1 perturbs set 1 and couples through d2, and vice versa.
    Returns (nelem,) values of
        sum over tracked entries of
        eta * (A^H - A^t) * [strain_q : a_star(d_other) : strain_p].
    """
    if solutions.material_hash != fem.field_hash(
            fem.material_field(mesh, d1, d2, phases)):
        raise StaleSolutionError("cell solutions do not match the material")
    d_other = d2 if which == 1 else d1
    astar = materials.a_star_field(mesh.element_values(d_other), phases,
                                   which=which)
    strains = fem.corrected_strains(mesh, solutions)     # (3, nelem, 3)
    out = np.zeros(mesh.n_elements)
    for key, target in spec.targets.items():
        w = spec.weights[key]
        if w == 0.0:
            continue
        p, q = materials._pair_index(key)
        mismatch = ah.entry(key) - target
        term = np.einsum("ei,eij,ej->e", strains[q], astar, strains[p],
                         optimize=True)
        out += w * mismatch * term
    return out


def constraint_integrand(which, mesh, d1, d2, phases, eff_multipliers):
    """Elementwise -h_star(d_other) volume term for one set."""
    d_other = d2 if which == 1 else d1
    hs = materials.h_star(mesh.element_values(d_other), eff_multipliers,
                          phases.eps, which=which)
    return -np.asarray(hs)


def velocity_integrand(which, mesh, d1, d2, phases, solutions, ah, spec,
                       eff_multipliers):
    """Full interface sensitivity g_i, averaged to nodes.

    Transporting with velocity v = extension of g_i decreases the
    constrained objective to first order (dL/dt = -int h' g_i v |grad d|).
    """
    g_elem = (elastic_integrand(which, mesh, d1, d2, phases, solutions, ah,
                                spec)
              + constraint_integrand(which, mesh, d1, d2, phases,
                                     eff_multipliers))
    return mesh.nodal_from_elements(g_elem), g_elem


def multiplier_update(state, volumes, targets, beta_step=0.1,
                      beta_growth=1.5, beta_max=1e3, grow_penalty=False):
    """One multiplier step: l <- l - beta_step * (V - V^t) on the
    constrained phases; in augmented mode the penalties grow by
    beta_growth when grow_penalty is set (the caller schedules this
    every 5 iterations), capped at beta_max."""
    new = state.copy()
    c = np.asarray(volumes) - np.asarray(targets)
    mask = new.constrained
    new.multipliers[mask] = new.multipliers[mask] - beta_step * c[mask]
    new.multipliers[~mask] = 0.0
    if state.mode == "augmented" and grow_penalty:
        new.penalties = np.minimum(new.penalties * beta_growth, beta_max)
    new.volumes = np.asarray(volumes, dtype=float).copy()
    return new


def _helmholtz_matrix(mesh, alpha):
    """alpha^2 * stiffness + consistent mass, on periodic scalar DOFs."""
    le = np.einsum("e,eai,ebi->eab", mesh.areas, mesh.grads, mesh.grads)
    me = mesh.areas[:, None, None] * _M_LOCAL[None, :, :]
    ae = alpha * alpha * le + me
    return sp.coo_matrix(
        (ae.ravel(), (mesh._scoo_rows, mesh._scoo_cols)),
        shape=(mesh.n_dof, mesh.n_dof)).tocsr()


def extend_velocity(mesh, g_elem, d, phases, alpha, rtol=1e-10):
    """Smear the interface sensitivity over the band and smooth it.

    Solves  int alpha^2 grad(theta).grad(w) + theta w
          = int g h'_eps(d) |grad d| w      (periodic)
    and returns theta as a full nodal field.
    """
    A = _helmholtz_matrix(mesh, alpha)
    d_bar = mesh.element_values(d)
    grad_d = np.linalg.norm(mesh.element_gradients(d), axis=1)
    source = (np.asarray(g_elem)
              * materials.heaviside_derivative(d_bar, phases.eps) * grad_d)
    b = np.zeros(mesh.n_dof)
    np.add.at(b, mesh.elem_sdof.ravel(),
              np.repeat(source * mesh.areas / 3.0, 3))
    diag = A.diagonal()
    x = np.zeros(mesh.n_dof)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return mesh.expand(x)
    for _ in range(10 * mesh.n_dof):
        if float(np.linalg.norm(r)) <= rtol * bnorm:
            break
        Ap = A @ p
        a = rz / float(p @ Ap)
        x += a * p
        r -= a * Ap
        z = r / diag
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    else:
        raise SolverError("velocity extension solve did not converge")
    return mesh.expand(x)
