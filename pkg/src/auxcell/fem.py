"""Periodic P1 elasticity: stiffness assembly and the three cell solves.

The operator lives on periodic vector DOFs and is symmetric positive
semi-definite with kernel spanned by the two rigid translations.
Solves use conjugate gradients with a Jacobi preconditioner; translation
modes are projected out of the right-hand side and every iterate, and
the final correctors are shifted to zero mass-weighted mean.
"""

import hashlib

import numpy as np
import scipy.sparse as sp

from . import materials
from .errors import IllPosedMaterialError, SolverError

# imposed unit mean strains E^11, E^22, E^12 in engineering convention
LOAD_CASES = ("11", "22", "12")
_E_ENG = np.eye(3)  # E^12 has e12 = 1/2, i.e. engineering shear 1


def material_field(mesh, d1, d2, phases):
    """Blend the phase tensors at element barycenters: (nelem, 3, 3).

    d1, d2 are nodal fields; the material is elementwise constant,
    evaluated at barycenters (consistent with one-point quadrature).
    """
    d1e = mesh.element_values(d1)
    d2e = mesh.element_values(d2)
    return materials.tensor_field(d1e, d2e, phases)


def field_hash(dmats):
    """Fingerprint of a material field, used to guard stale solutions."""
    return hashlib.sha256(np.ascontiguousarray(dmats).tobytes()).hexdigest()


def _check_material(dmats):
    # Sylvester criterion on each 3x3 block, vectorized
    m = dmats
    m1 = m[:, 0, 0]
    m2 = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] ** 2
    m3 = np.linalg.det(m)
    if np.any(m1 <= 0) or np.any(m2 <= 0) or np.any(m3 <= 0):
        raise IllPosedMaterialError("element tensor not positive definite")


def assemble_stiffness(mesh, dmats):
    """Assemble the periodic stiffness matrix (CSR, 2*n^2 square)."""
    if len(dmats) != mesh.n_elements:
        raise IllPosedMaterialError("material field does not match mesh")
    _check_material(dmats)
    ke = np.einsum("e,eip,eij,ejq->epq", mesh.areas, mesh.B, dmats, mesh.B,
                   optimize=True)
    K = sp.coo_matrix(
        (ke.ravel(), (mesh._coo_rows, mesh._coo_cols)),
        shape=(mesh.n_vec_dof, mesh.n_vec_dof),
    ).tocsr()
    return K


def _project_translations(x):
    """Remove the two rigid-translation components in place (returns x)."""
    x[0::2] -= x[0::2].mean()
    x[1::2] -= x[1::2].mean()
    return x


def _pcg(K, b, x0, rtol, maxiter):
    """Jacobi-preconditioned CG on the translation-free subspace."""
    diag = K.diagonal()
    inv_diag = 1.0 / diag
    x = _project_translations(b * 0.0 if x0 is None else x0.copy())
    r = b - K @ x
    _project_translations(r)
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0.0, 0
    for it in range(maxiter):
        rnorm = float(np.linalg.norm(r))
        if rnorm <= rtol * bnorm:
            return x, rnorm / bnorm, it
        Kp = K @ p
        alpha = rz / float(p @ Kp)
        x += alpha * p
        r -= alpha * Kp
        _project_translations(r)
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    rnorm = float(np.linalg.norm(b - K @ x))
    raise SolverError(
        f"CG stalled after {maxiter} iterations, relative residual "
        f"{rnorm / bnorm:.3e}", residual=rnorm / bnorm)


class CellSolutions:
    """The three periodic correctors, stored on periodic vector DOFs."""

    def __init__(self, chi, residuals, material_hash):
        self.chi = chi                      # (3, n_vec_dof)
        self.residuals = residuals          # (3,) relative residuals
        self.material_hash = material_hash

    def nodal(self, mesh, case):
        """Corrector for one load case as a full (n_nodes, 2) array."""
        i = LOAD_CASES.index(case) if isinstance(case, str) else case
        u = self.chi[i]
        ux = mesh.expand(u[0::2])
        uy = mesh.expand(u[1::2])
        return np.column_stack([ux, uy])


def _rhs(mesh, dmats, case_index):
    """Load vector -int_Y A E^{ml} : eps(w) for one imposed mean strain."""
    s = dmats @ _E_ENG[case_index]                       # (nelem, 3)
    fe = -np.einsum("e,eip,ei->ep", mesh.areas, mesh.B, s)
    f = np.zeros(mesh.n_vec_dof)
    np.add.at(f, mesh.elem_vdof.ravel(), fe.ravel())
    return f


def solve_cell_problems(mesh, dmats, rtol=1e-9, warm_start=None, maxiter=None):
    """Solve the three periodic cell problems on the given material field."""
    K = assemble_stiffness(mesh, dmats)
    if maxiter is None:
        maxiter = 10 * mesh.n_vec_dof
    chi = np.zeros((3, mesh.n_vec_dof))
    residuals = np.zeros(3)
    for i in range(3):
        x0 = None if warm_start is None else warm_start.chi[i]
        b = _rhs(mesh, dmats, i)
        x, res, _ = _pcg(K, b, x0, rtol, maxiter)
        # enforce zero mass-weighted mean (shift along the kernel)
        w = mesh.dof_weight
        x[0::2] -= w @ x[0::2]
        x[1::2] -= w @ x[1::2]
        chi[i] = x
        residuals[i] = res
    return CellSolutions(chi, residuals, field_hash(dmats))


def corrected_strains(mesh, solutions):
    """Engineering strains E^{ml} + eps(chi^{ml}) per element: (3, nelem, 3)."""
    out = np.empty((3, mesh.n_elements, 3))
    for i in range(3):
        ue = solutions.chi[i][mesh.elem_vdof]            # (nelem, 6)
        out[i] = _E_ENG[i] + np.einsum("eij,ej->ei", mesh.B, ue)
    return out
