"""Homogenized tensor, the weighted tracking objective, and reporting."""

from dataclasses import dataclass

import numpy as np

from . import fem, materials
from .errors import ConfigError, DegenerateTensorError

#: the entries the optimization tracks by default (weights from the presets)
DEFAULT_ENTRIES = ("1111", "1122", "2222")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Target values and weights for a set of tensor entries.

    Entries not listed carry weight zero; each listed symmetric pair is
    counted once.
    """

    targets: dict    # e.g. {"1111": 0.1, "1122": -0.1, "2222": 0.1}
    weights: dict    # same keys, non-negative, at least one positive

    def __post_init__(self):
        if set(self.targets) != set(self.weights):
            raise ConfigError("targets and weights must list the same entries")
        if any(w < 0 for w in self.weights.values()):
            raise ConfigError("weights must be non-negative")
        if not any(w > 0 for w in self.weights.values()):
            raise ConfigError("at least one weight must be positive")
        for key in self.targets:
            materials._pair_index(key)  # validates the index string


def homogenized_tensor(mesh, dmats, solutions):
    """Effective tensor by the symmetric energy form over the cell.

    Both factors carry the corrector strain, so major symmetry is exact
    and no adjoint is ever needed downstream.
    """
    strains = fem.corrected_strains(mesh, solutions)     # (3, nelem, 3)
    m = np.einsum("pei,eij,qej,e->pq", strains, dmats, strains, mesh.areas,
                  optimize=True)
    m = 0.5 * (m + m.T)
    return materials.ElasticTensor4(m)


def objective(ah, spec):
    """J = 1/2 * sum of weighted squared mismatches over the listed entries."""
    j = 0.0
    for key, target in spec.targets.items():
        j += spec.weights[key] * (ah.entry(key) - target) ** 2
    return 0.5 * j


def apparent_poisson(ah):
    """Apparent Poisson ratio from the compliance of the homogenized tensor."""
    try:
        s = np.linalg.inv(ah.m)
    except np.linalg.LinAlgError:
        raise DegenerateTensorError("homogenized tensor is singular")
    if abs(s[0, 0]) < 1e-14 or not np.isfinite(s).all():
        raise DegenerateTensorError("homogenized tensor is singular")
    return float(-s[1, 0] / s[0, 0])


def volume_averaged_tensor(mesh, dmats):
    """Plain volume average of the material field (Voigt upper bound)."""
    m = np.einsum("e,eij->ij", mesh.areas, dmats)
    return materials.ElasticTensor4(m)
