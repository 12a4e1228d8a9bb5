"""Phase elasticity tensors and the smoothed four-phase interpolation.

Two signed-distance fields (d1, d2) split the cell into four regions:

    region 1: d1 < 0, d2 < 0      region 2: d1 > 0, d2 < 0
    region 3: d1 < 0, d2 > 0      region 4: d1 > 0, d2 > 0

A smoothed Heaviside of half-width eps blends the four phase tensors
across a tubular band of width 2*eps around each zero level set.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# Voigt pair -> index in the (11, 22, 12) basis
_VOIGT = {(1, 1): 0, (2, 2): 1, (1, 2): 2, (2, 1): 2}


def _pair_index(key):
    """'1122' or (1,1,2,2) -> (row, col) in the 3x3 form."""
    if isinstance(key, str):
        key = tuple(int(c) for c in key)
    i, j, k, l = key
    return _VOIGT[(i, j)], _VOIGT[(k, l)]


class ElasticTensor4:
    """Plane elasticity tensor in symmetric 3x3 (engineering) form.

    The 3x3 matrix m acts on engineering strain (e11, e22, 2*e12), so
    m[2, 2] stores A_1212 and the quadratic form eps^T m eps equals the
    elastic energy density A_ijkl e_ij e_kl.
    """

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3) or not np.allclose(m, m.T, atol=1e-12):
            raise ConfigError("elastic tensor needs a symmetric 3x3 matrix")
        self.m = 0.5 * (m + m.T)

    @classmethod
    def isotropic(cls, E, nu):
        return isotropic_tensor(E, nu)

    def entry(self, i, j=None, k=None, l=None):
        """Component A_ijkl; accepts entry('1122') or entry(1, 1, 2, 2)."""
        key = i if j is None else (i, j, k, l)
        r, c = _pair_index(key)
        return float(self.m[r, c])

    def quad(self, eps_eng):
        """Energy density on an engineering strain vector."""
        e = np.asarray(eps_eng, dtype=float)
        return float(e @ self.m @ e)

    def is_positive_definite(self):
        try:
            np.linalg.cholesky(self.m)
            return True
        except np.linalg.LinAlgError:
            return False

    def __add__(self, other):
        return ElasticTensor4(self.m + other.m)

    def __sub__(self, other):
        return ElasticTensor4(self.m - other.m)

    def __mul__(self, s):
        return ElasticTensor4(self.m * float(s))

    __rmul__ = __mul__

    def __repr__(self):
        return f"ElasticTensor4({self.m.tolist()})"


def isotropic_tensor(E, nu):
    """Isotropic plane-stress tensor 2*mu*I4 + (kappa - mu)*I2(x)I2 in 2D.

    Plane-stress moduli: mu = E/(2(1+nu)), kappa = E/(2(1-nu)), giving
    A_1111 = kappa + mu, A_1122 = kappa - mu, A_1212 = mu.
    """
    if E <= 0 or not (-1.0 < nu < 0.5):
        raise ConfigError(f"non-physical moduli E={E}, nu={nu}")
    mu = E / (2.0 * (1.0 + nu))
    kappa = E / (2.0 * (1.0 - nu))
    return ElasticTensor4([
        [kappa + mu, kappa - mu, 0.0],
        [kappa - mu, kappa + mu, 0.0],
        [0.0, 0.0, mu],
    ])


@dataclass(frozen=True)
class PhaseSet:
    """The four phase tensors, their volume targets and interface width."""

    tensors: tuple      # four ElasticTensor4
    volume_targets: tuple = (0.0, 0.0, 0.0, 0.0)
    eps: float = 0.02

    def __post_init__(self):
        if len(self.tensors) != 4:
            raise ConfigError("exactly four phases required")
        if self.eps <= 0:
            raise ConfigError("interface half-width must be positive")
        for v in self.volume_targets:
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"volume target {v} outside [0, 1]")

    @property
    def stack(self):
        """(4, 3, 3) array of the phase matrices."""
        return np.stack([t.m for t in self.tensors])

    @classmethod
    def from_moduli(cls, E, nu, volume_targets=(0.0, 0.0, 0.0, 0.0), eps=0.02):
        tensors = tuple(isotropic_tensor(e, v) for e, v in zip(E, nu))
        return cls(tensors, tuple(volume_targets), eps)


def heaviside(t, eps):
    """Smoothed Heaviside: 0 below -eps, 1 above eps, C^1 ramp between."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    t = np.asarray(t, dtype=float)
    s = np.clip(t / eps, -1.0, 1.0)
    # clip: sin(pi*s) at the clipped endpoints leaves an O(1e-16) residue
    h = np.clip(0.5 * (1.0 + s + np.sin(np.pi * s) / np.pi), 0.0, 1.0)
    return h if h.ndim else float(h)

def heaviside_derivative(t, eps):
    """Derivative of the smoothed Heaviside; integrates to 1, zero outside the band."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= eps
    d = np.where(inside, (1.0 + np.cos(np.pi * np.clip(t / eps, -1, 1))) / (2.0 * eps), 0.0)
    return d if d.ndim else float(d)


def _weights(d1, d2, eps):
    h1 = np.asarray(heaviside(d1, eps))
    h2 = np.asarray(heaviside(d2, eps))
    return np.stack([
        (1.0 - h1) * (1.0 - h2),
        h1 * (1.0 - h2),
        (1.0 - h1) * h2,
        h1 * h2,
    ])


def phase_densities(d1, d2, phases):
    """Pointwise phase indicator densities (iota_1..4); they sum to 1."""
    w = _weights(d1, d2, phases.eps)
    if w.ndim == 1:
        return tuple(float(x) for x in w)
    return tuple(w)


def interpolate_tensor(d1, d2, phases):
    """Four-phase blended tensor at a single point."""
    w = _weights(float(d1), float(d2), phases.eps)
    return ElasticTensor4(np.einsum("p,pij->ij", w, phases.stack))


def tensor_field(d1, d2, phases):
    """Vectorized blend: (m,) distance samples -> (m, 3, 3) matrices."""
    w = _weights(np.asarray(d1, float), np.asarray(d2, float), phases.eps)
    return np.einsum("pe,pij->eij", w, phases.stack)


def a_star(d_other, phases, which=1):
    """Interface sensitivity tensor: derivative of the blend with respect
    to the Heaviside weight of set `which`, evaluated with the *other*
    set's distance (the two velocities cross-couple through this).

    d(blend)/dh1 = (A2 - A1) + h2 (A1 - A2 - A3 + A4)
    d(blend)/dh2 = (A3 - A1) + h1 (A1 - A2 - A3 + A4)

    Phases 2 and 3 swap roles between the two sets; the base difference
    is the phase gained when the set's own Heaviside switches on.
    """
    a1, a2, a3, a4 = phases.tensors
    base = (a2 - a1) if which == 1 else (a3 - a1)
    h = heaviside(float(d_other), phases.eps)
    return base + h * ((a1 - a2 - a3) + a4)


def a_star_field(d_other, phases, which=1):
    """Vectorized a_star: (m,) -> (m, 3, 3)."""
    s = phases.stack
    base = s[1] - s[0] if which == 1 else s[2] - s[0]
    slope = s[0] - s[1] - s[2] + s[3]
    h = np.asarray(heaviside(d_other, phases.eps))
    return base[None, :, :] + h[:, None, None] * slope[None, :, :]


def h_star(d_other, multipliers, eps, which=1):
    """Multiplier counterpart of a_star for the volume terms."""
    l1, l2, l3, l4 = multipliers
    base = (l2 - l1) if which == 1 else (l3 - l1)
    h = np.asarray(heaviside(d_other, eps))
    out = base + h * (l1 - l2 - l3 + l4)
    return out if out.ndim else float(out)
