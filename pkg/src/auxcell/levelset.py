"""Two-level-set storage and evolution on the periodic grid.

Nodal scalar fields live on the full (n+1)^2 node set but are periodic
(last row/column duplicate the first). Stencil operations work on the
unique n x n sub-grid with wrapped differences, so translating a field
by whole grid periods commutes with every operator bit-exactly.

Sign convention: phi < 0 inside the sub-domain, > 0 outside.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateLevelSetError


def to_grid(mesh, nodal):
    """Full nodal field -> unique periodic (n, n) grid, indexed [iy, ix]."""
    n, nn = mesh.n, mesh.n + 1
    return np.asarray(nodal).reshape(nn, nn)[:n, :n].copy()


def from_grid(mesh, grid):
    """Unique periodic (n, n) grid -> full nodal field with wrapped edges."""
    n, nn = mesh.n, mesh.n + 1
    full = np.empty((nn, nn))
    full[:n, :n] = grid
    full[n, :n] = grid[0, :]
    full[:n, n] = grid[:, 0]
    full[n, n] = grid[0, 0]
    return full.ravel()


def _diffs(g, dx):
    """One-sided periodic differences: (backward, forward) in x and y."""
    dmx = (g - np.roll(g, 1, axis=1)) / dx
    dpx = (np.roll(g, -1, axis=1) - g) / dx
    dmy = (g - np.roll(g, 1, axis=0)) / dx
    dpy = (np.roll(g, -1, axis=0) - g) / dx
    return dmx, dpx, dmy, dpy


def _godunov_norm(g, dx, speed):
    """Godunov-upwinded |grad|, upwind direction chosen by the sign of speed."""
    dmx, dpx, dmy, dpy = _diffs(g, dx)
    pos = speed > 0
    gx2_pos = np.maximum(np.maximum(dmx, 0.0) ** 2, np.minimum(dpx, 0.0) ** 2)
    gy2_pos = np.maximum(np.maximum(dmy, 0.0) ** 2, np.minimum(dpy, 0.0) ** 2)
    gx2_neg = np.maximum(np.minimum(dmx, 0.0) ** 2, np.maximum(dpx, 0.0) ** 2)
    gy2_neg = np.maximum(np.minimum(dmy, 0.0) ** 2, np.maximum(dpy, 0.0) ** 2)
    gx2 = np.where(pos, gx2_pos, gx2_neg)
    gy2 = np.where(pos, gy2_pos, gy2_neg)
    return np.sqrt(gx2 + gy2)


def gradient_norm(mesh, nodal):
    """|grad phi| by periodic central differences, as a full nodal field."""
    g = to_grid(mesh, nodal)
    dx = mesh.dx
    gx = (np.roll(g, -1, axis=1) - np.roll(g, 1, axis=1)) / (2 * dx)
    gy = (np.roll(g, -1, axis=0) - np.roll(g, 1, axis=0)) / (2 * dx)
    return from_grid(mesh, np.sqrt(gx * gx + gy * gy))


def reinitialize(mesh, phi, sub_iterations=50):
    """Relax a level set toward the signed distance to its zero set.

    Explicit Godunov pseudo-time stepping of the eikonal relaxation with
    the smoothed sign S = phi0 / sqrt(phi0^2 + dx^2) frozen from the
    input, step 0.5*dx. Nodes whose stencil straddles the zero level set
    instead relax toward a subcell distance estimate frozen from the
    input (Russo & Smereka); without this fix the plain scheme never
    reaches a discrete fixed point and drags the interface a little on
    every application, which would poison a monotone line search.
    """
    g = to_grid(mesh, phi)
    if g.min() >= 0.0 or g.max() <= 0.0:
        raise DegenerateLevelSetError("level set has one sign everywhere")
    dx = mesh.dx
    g0 = g.copy()
    s = g0 / np.sqrt(g0 * g0 + dx * dx)
    # interface band: sign change with any 4-neighbor of the input; the
    # frozen target d0 is the distance to the zero crossing by linear
    # interpolation along grid lines (min over crossing neighbors), which
    # is its own fixed point under re-application
    band = np.zeros(g0.shape, dtype=bool)
    t_min = np.full(g0.shape, np.inf)
    for ax in (0, 1):
        for sh in (1, -1):
            gn = np.roll(g0, sh, axis=ax)
            cross = (g0 * gn) < 0.0
            band |= cross
            t = np.abs(g0) / np.maximum(np.abs(g0) + np.abs(gn), 1e-300)
            t_min = np.where(cross, np.minimum(t_min, t), t_min)
    d0 = np.where(band, np.sign(g0) * dx * np.where(band, t_min, 0.0), 0.0)
    dt = 0.5 * dx
    lam = dt / dx
    for _ in range(int(sub_iterations)):
        grad = _godunov_norm(g, dx, s)
        g_far = g - dt * s * (grad - 1.0)
        g_band = g - lam * (np.sign(g0) * np.abs(g) - d0)
        g = np.where(band, g_band, g_far)
    return from_grid(mesh, g)


def transport(mesh, phi, velocity, dt):
    """One explicit Godunov step of phi_t + v |grad phi| = 0."""
    g = to_grid(mesh, phi)
    v = to_grid(mesh, velocity)
    vmax = float(np.abs(v).max())
    if dt > 0.5 * mesh.dx / max(vmax, 1e-12) * (1.0 + 1e-9):
        raise ConfigError(
            f"time step {dt} violates the CFL bound for max|v| = {vmax}")
    grad = _godunov_norm(g, mesh.dx, v)
    return from_grid(mesh, g - dt * v * grad)


def cfl_timestep(velocity, dx):
    """Largest stable explicit step: 0.5*dx / max|v| (floored at 1e-12)."""
    vmax = float(np.abs(np.asarray(velocity)).max())
    return 0.5 * dx / max(vmax, 1e-12)


@dataclass
class MultiLevelSet:
    """The two nodal level-set fields plus reinitialization bookkeeping."""

    phi1: np.ndarray
    phi2: np.ndarray
    since_reinit: int = 0

    def copy(self):
        return MultiLevelSet(self.phi1.copy(), self.phi2.copy(),
                             self.since_reinit)


def _periodic_delta(coord, center):
    d = coord - center
    return d - np.round(d)


def circles_distance(mesh, centers, radius):
    """Exact signed distance to a union of circles, periodically wrapped."""
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    d = None
    for cx, cy in centers:
        ddx = _periodic_delta(x, cx)
        ddy = _periodic_delta(y, cy)
        di = np.hypot(ddx, ddy) - radius
        d = di if d is None else np.minimum(d, di)
    return d


def circle_array_pattern(mesh, rows, cols, radius, invert=False):
    """Signed distance to a rows x cols array of circles; invert swaps
    inside and outside (material with holes instead of islands)."""
    if rows < 1 or cols < 1 or radius <= 0:
        raise ConfigError("circle array needs rows, cols >= 1 and radius > 0")
    centers = [(-0.5 + (i + 0.5) / cols, -0.5 + (j + 0.5) / rows)
               for j in range(rows) for i in range(cols)]
    d = circles_distance(mesh, centers, radius)
    return -d if invert else d


def _segment_distance(px, py, ax, ay, bx, by):
    """Distance from points (px, py) to segment (a, b), all periodic-free."""
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    t = np.clip(((px - ax) * vx + (py - ay) * vy) / max(L2, 1e-300), 0.0, 1.0)
    return np.hypot(px - (ax + t * vx), py - (ay + t * vy))


def segments_pattern(mesh, segments, thickness, invert=False):
    """Signed distance to a union of thickened segments (capsules),
    periodically wrapped. Negative inside the material strokes; invert
    swaps material and complement.

    segments: iterable of (x1, y1, x2, y2) in cell coordinates.
    """
    if thickness <= 0:
        raise ConfigError("segments pattern needs thickness > 0")
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    d = np.full(mesh.n_nodes, np.inf)
    for seg in segments:
        if len(seg) != 4:
            raise ConfigError("each segment needs 4 coordinates")
        ax, ay, bx, by = (float(c) for c in seg)
        for sx in (-1.0, 0.0, 1.0):
            for sy in (-1.0, 0.0, 1.0):
                d = np.minimum(d, _segment_distance(
                    x + sx, y + sy, ax, ay, bx, by))
    phi = d - 0.5 * thickness
    return -phi if invert else phi


def reentrant_pattern(mesh, rows=1, amplitude=0.18, gap=0.28,
                      thickness=0.06, invert=False, cross=False):
    """Signed distance to a re-entrant (bowtie) honeycomb frame.

    Each of the `rows` horizontal bands holds two chevron walls bending
    toward each other (the re-entrant geometry that couples axial strain
    to transverse strain with a negative sign already in linear
    elasticity), tied by vertical struts at the chevron ends.

      amplitude: chevron depth (how far the walls bend inward)
      gap:       wall separation at the strut line, as a fraction of the
                 band height
    """
    if rows < 1:
        raise ConfigError("reentrant pattern needs rows >= 1")
    hband = 1.0 / rows
    segs = []
    for k in range(rows):
        yc = -0.5 + (k + 0.5) * hband       # band center line
        b = 0.5 * gap * hband               # wall offset at x = +-1/2
        c = b - amplitude * hband           # wall offset mid-chevron
        for s in (+1.0, -1.0):
            segs.append((-0.5, yc + s * b, 0.0, yc + s * c))
            segs.append((0.0, yc + s * c, 0.5, yc + s * b))
        # struts between neighboring bands through the band boundary
        top = yc + b
        bot = yc + hband - b                # next band's lower wall
        segs.append((-0.5, top, -0.5, bot))
    if cross:
        # union with the 90-degree rotated copy so both axes carry load
        segs += [(sy1, sx1, sy2, sx2) for sx1, sy1, sx2, sy2 in segs]
    return segments_pattern(mesh, segs, thickness, invert)


def arrows_pattern(mesh, rows=1, apex=0.3, thickness=0.1, invert=False):
    """Signed distance to a double-arrowhead frame (auxetic already in
    linear elasticity, unlike rotating-square slits which only become
    auxetic at finite rotation).

    Each horizontal band holds two nested chevrons sharing their base
    vertices at x = +-1/2; the steep chevron's apex coincides with the
    next band's shallow apex, which chains the arrowheads vertically so
    both axes carry load.

      apex: shallow-apex height as a fraction of the band height.
    """
    if rows < 1:
        raise ConfigError("arrows pattern needs rows >= 1")
    if not (0.0 < apex < 1.0):
        raise ConfigError("arrows apex fraction must lie in (0, 1)")
    h = 1.0 / rows
    segs = []
    for k in range(rows):
        y0 = -0.5 + k * h
        ya = y0 + apex * h              # shallow apex
        yb = y0 + (1.0 + apex) * h      # steep apex (next band's shallow)
        segs += [(-0.5, y0, 0.0, ya), (0.0, ya, 0.5, y0),
                 (-0.5, y0, 0.0, yb), (0.0, yb, 0.5, y0)]
    return segments_pattern(mesh, segs, thickness, invert)


def slit_pattern(mesh, cells=2, thickness=0.05, hinge=0.08, invert=False):
    """Signed distance to a rotating-squares perforation: slits along all
    internal grid lines of a cells x cells block partition, each stopped
    short of the corners by the hinge width. Negative inside the slits;
    invert makes the slits the positive (void) phase instead.
    """
    if cells < 1 or thickness <= 0 or hinge < 0:
        raise ConfigError("slit pattern needs cells >= 1, thickness > 0, "
                          "hinge >= 0")
    a = 1.0 / cells
    half = 0.5 * a - hinge
    if half <= 0:
        raise ConfigError("hinge width leaves no slit length")
    x = mesh.nodes[:, 0]
    y = mesh.nodes[:, 1]
    d = np.full(mesh.n_nodes, np.inf)
    for i in range(cells):
        for j in range(cells):
            cx = -0.5 + i * a          # vertical grid line
            cy = -0.5 + (j + 0.5) * a  # centered on the edge midpoint
            for sx in (-1.0, 0.0, 1.0):
                for sy in (-1.0, 0.0, 1.0):
                    d = np.minimum(d, _segment_distance(
                        x + sx, y + sy, cx, cy - half, cx, cy + half))
                    d = np.minimum(d, _segment_distance(
                        x + sx, y + sy, cy - half, cx, cy + half, cx))
    phi = d - 0.5 * thickness          # negative inside the slits
    return -phi if invert else phi


def concentric_pattern(mesh, radii, invert=False):
    """Signed distance to nested rings centered at the origin.

    The region alternates starting inside radii[0]; with one radius this
    is a single disk.
    """
    radii = sorted(float(r) for r in radii)
    if not radii or radii[0] <= 0:
        raise ConfigError("concentric pattern needs positive radii")
    rho = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    d = np.min(np.abs(rho[:, None] - np.asarray(radii)[None, :]), axis=1)
    inside = (rho[:, None] < np.asarray(radii)[None, :]).sum(axis=1) % 2 == 1
    phi = np.where(inside, -d, d)
    return -phi if invert else phi


def init_pattern(mesh, spec1, spec2):
    """Build the two level sets from pattern specs.

    Each spec is a dict with a 'pattern' key: 'arrows' (rows, apex,
    thickness, invert), 'circles' (rows, cols, radius, invert), 'slits'
    (cells, thickness, hinge, invert), 'concentric' (radii, invert) or
    'values' (a nodal array, e.g. read back from a saved run).
    """
    fields = []
    for spec in (spec1, spec2):
        kind = spec.get("pattern", "circles")
        if kind == "circles":
            phi = circle_array_pattern(
                mesh, int(spec.get("rows", 3)), int(spec.get("cols", 3)),
                float(spec.get("radius", 0.1)), bool(spec.get("invert", False)))
        elif kind == "arrows":
            phi = arrows_pattern(
                mesh, int(spec.get("rows", 1)),
                float(spec.get("apex", 0.3)),
                float(spec.get("thickness", 0.1)),
                bool(spec.get("invert", False)))
        elif kind == "slits":
            phi = slit_pattern(
                mesh, int(spec.get("cells", 2)),
                float(spec.get("thickness", 0.05)),
                float(spec.get("hinge", 0.08)),
                bool(spec.get("invert", False)))
        elif kind == "concentric":
            phi = concentric_pattern(mesh, spec.get("radii", [0.25]),
                                     bool(spec.get("invert", False)))
        elif kind == "values":
            phi = np.asarray(spec["values"], dtype=float).ravel()
            if phi.shape != (mesh.n_nodes,):
                raise ConfigError("level-set values do not match the mesh")
        else:
            raise ConfigError(f"unknown init pattern {kind!r}")
        if phi.min() >= 0.0 or phi.max() <= 0.0:
            import warnings
            warnings.warn(f"init pattern {kind!r} produces an empty phase",
                          stacklevel=2)
        fields.append(phi)
    return MultiLevelSet(fields[0], fields[1])
