"""Structured periodic triangulation of the unit cell Y = (-1/2, 1/2)^2.

The mesh is an n x n grid of squares, each split into two P1 triangles.
The splitting diagonal alternates in a checkerboard pattern so the
triangulation keeps the 4-fold symmetry of the cell (a uniform diagonal
direction biases optimized designs). Nodes on the right/top boundary are
identified with their left/bottom masters, giving n^2 periodic scalar
DOFs per displacement component.
"""

import numpy as np

from .errors import ConfigError


def _voigt_b_matrices(grads):
    """Strain-displacement matrices (engineering convention) per element.

    grads: (nelem, 3, 2) gradients of the three P1 basis functions.
    Returns B with shape (nelem, 3, 6); rows are (e11, e22, 2*e12),
    columns the 6 local displacement DOFs (ux0, uy0, ux1, uy1, ux2, uy2).
    """
    nelem = grads.shape[0]
    B = np.zeros((nelem, 3, 6))
    for a in range(3):
        gx = grads[:, a, 0]
        gy = grads[:, a, 1]
        B[:, 0, 2 * a] = gx
        B[:, 1, 2 * a + 1] = gy
        B[:, 2, 2 * a] = gy
        B[:, 2, 2 * a + 1] = gx
    return B


class UnitCellMesh:
    """Immutable structured periodic triangulation; safe to share."""

    def __init__(self, n):
        if n < 2 or n % 2 != 0:
            raise ConfigError(f"cells-per-side must be even and >= 2, got {n}")
        self.n = n
        self.dx = 1.0 / n
        nn = n + 1

        ix, iy = np.meshgrid(np.arange(nn), np.arange(nn), indexing="xy")
        # node index = iy*(n+1) + ix, coordinates in (-1/2, 1/2)
        self.nodes = np.column_stack(
            [(-0.5 + ix.ravel() * self.dx), (-0.5 + iy.ravel() * self.dx)]
        )

        elements = []
        for j in range(n):
            for i in range(n):
                n00 = j * nn + i
                n10 = j * nn + i + 1
                n01 = (j + 1) * nn + i
                n11 = (j + 1) * nn + i + 1
                if (i + j) % 2 == 0:
                    elements.append((n00, n10, n11))
                    elements.append((n00, n11, n01))
                else:
                    elements.append((n00, n10, n01))
                    elements.append((n10, n11, n01))
        self.elements = np.array(elements, dtype=np.int64)

        # periodic identification: node (ix, iy) -> master (ix % n, iy % n)
        mix = ix.ravel() % n
        miy = iy.ravel() % n
        self.node_master = miy * nn + mix          # master node index
        self.node_dof = miy * n + mix              # periodic scalar DOF
        self.n_dof = n * n
        self.n_vec_dof = 2 * self.n_dof

        # element geometry
        p0 = self.nodes[self.elements[:, 0]]
        p1 = self.nodes[self.elements[:, 1]]
        p2 = self.nodes[self.elements[:, 2]]
        e1 = p1 - p0
        e2 = p2 - p0
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        self.areas = 0.5 * det
        self.area = 0.5 * self.dx * self.dx  # all equal on this grid
        # grad(lambda_a) = T^{-T} grad_ref(lambda_a)
        inv_det = 1.0 / det
        # T^{-1} rows: [ e2y, -e2x; -e1y, e1x ] / det ; T^{-T} is its transpose
        gref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        Tinv = np.empty((len(det), 2, 2))
        Tinv[:, 0, 0] = e2[:, 1] * inv_det
        Tinv[:, 0, 1] = -e2[:, 0] * inv_det
        Tinv[:, 1, 0] = -e1[:, 1] * inv_det
        Tinv[:, 1, 1] = e1[:, 0] * inv_det
        # grad_a = Tinv^T @ gref_a
        self.grads = np.einsum("eji,aj->eai", Tinv, gref)
        self.barycenters = (p0 + p1 + p2) / 3.0

        # periodic DOF connectivity
        self.elem_sdof = self.node_dof[self.elements]          # (nelem, 3)
        ed = np.empty((len(self.elements), 6), dtype=np.int64)
        ed[:, 0::2] = 2 * self.elem_sdof
        ed[:, 1::2] = 2 * self.elem_sdof + 1
        self.elem_vdof = ed

        self.B = _voigt_b_matrices(self.grads)

        # lumped nodal area weights on periodic scalar DOFs (sum = |Y| = 1)
        w = np.zeros(self.n_dof)
        np.add.at(w, self.elem_sdof.ravel(),
                  np.repeat(self.areas / 3.0, 3))
        self.dof_weight = w

        # COO scatter pattern for 6x6 element matrices
        rows = np.repeat(self.elem_vdof, 6, axis=1)
        cols = np.tile(self.elem_vdof, (1, 6))
        self._coo_rows = rows.ravel()
        self._coo_cols = cols.ravel()
        # same for scalar 3x3 element matrices
        srows = np.repeat(self.elem_sdof, 3, axis=1)
        scols = np.tile(self.elem_sdof, (1, 3))
        self._scoo_rows = srows.ravel()
        self._scoo_cols = scols.ravel()

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    def expand(self, dof_values):
        """Periodic DOF values -> full nodal array (last axis of size n_dof)."""
        return np.asarray(dof_values)[..., self.node_dof]

    def restrict(self, nodal_values):
        """Full nodal array -> periodic DOF values, taken from master nodes."""
        n, nn = self.n, self.n + 1
        grid = np.asarray(nodal_values).reshape(nn, nn)
        return grid[:n, :n].ravel()

    def element_values(self, nodal_field):
        """Barycentric (mean of vertices) value of a nodal field per element."""
        return np.asarray(nodal_field)[self.elements].mean(axis=1)

    def element_gradients(self, nodal_field):
        """P1 gradient of a nodal scalar field, constant per element: (nelem, 2)."""
        vals = np.asarray(nodal_field)[self.elements]
        return np.einsum("ea,eai->ei", vals, self.grads)

    def nodal_from_elements(self, elem_values):
        """Area-weighted average of elementwise values to nodes (full array)."""
        acc = np.zeros(self.n_dof)
        np.add.at(acc, self.elem_sdof.ravel(),
                  np.repeat(elem_values * self.areas / 3.0, 3))
        return self.expand(acc / self.dof_weight)

    def integrate_nodal(self, nodal_field):
        """Integral over Y of a P1 nodal field (exact)."""
        vals = np.asarray(nodal_field)[self.elements]
        return float(np.sum(self.areas * vals.mean(axis=1)))


def build_mesh(n):
    """Build the structured periodic triangulation with n cells per side."""
    return UnitCellMesh(int(n))


def periodic_dof_count(mesh):
    """Distinct periodic scalar DOFs per displacement component."""
    return mesh.n_dof
