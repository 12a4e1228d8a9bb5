"""File emission: legacy-ASCII VTK fields, CSV histories, state files.

VTK and manifest writes are atomic (temp file + rename) and byte
deterministic for identical state. The history CSV is written
incrementally so a killed run still leaves a valid partial file.
"""

import os

import numpy as np

from . import fem, materials, velocity
from .errors import AuxcellError

HISTORY_HEADER = ("iteration,J,A1111,A1122,A2222,A1212,"
                  "V1,V2,V3,V4,l1,l2,l3,l4,dt,ls_trials")


def _atomic_write(path, data):
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w", encoding="ascii", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise AuxcellError(f"cannot write {path}: {exc}") from exc


def _fmt(x):
    return f"{x:.9e}"


def export_fields(mesh, phases, levelsets, solutions, path):
    """Write the current design as a legacy-ASCII VTK structured-points file.

    Point data: the two level sets, the four phase densities, the argmax
    phase index, and the three corrector displacement fields.
    """
    nn = mesh.n + 1
    d1, d2 = levelsets.phi1, levelsets.phi2
    dens = materials.phase_densities(d1, d2, phases)
    phase_index = np.argmax(np.stack(dens), axis=0) + 1

    lines = [
        "# vtk DataFile Version 3.0",
        "auxcell unit-cell design",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nn} {nn} 1",
        f"ORIGIN {_fmt(-0.5)} {_fmt(-0.5)} {_fmt(0.0)}",
        f"SPACING {_fmt(mesh.dx)} {_fmt(mesh.dx)} {_fmt(1.0)}",
        f"POINT_DATA {nn * nn}",
    ]

    def scalars(name, values, kind="double"):
        lines.append(f"SCALARS {name} {kind} 1")
        lines.append("LOOKUP_TABLE default")
        if kind == "int":
            lines.extend(str(int(v)) for v in values)
        else:
            lines.extend(_fmt(v) for v in values)

    scalars("phi1", d1)
    scalars("phi2", d2)
    for k, rho in enumerate(dens, start=1):
        scalars(f"iota{k}", rho)
    scalars("phase_index", phase_index, kind="int")
    for case in fem.LOAD_CASES:
        u = solutions.nodal(mesh, case)
        lines.append(f"VECTORS chi{case} double")
        lines.extend(f"{_fmt(ux)} {_fmt(uy)} {_fmt(0.0)}"
                     for ux, uy in u)
    _atomic_write(path, "\n".join(lines) + "\n")


def read_vtk_fields(path):
    """Minimal reader for the files written above (used by tests and the
    from-file init): returns {name: array}."""
    fields = {}
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split("\n")
    i = 0
    npoints = None
    while i < len(tokens):
        line = tokens[i].split()
        if line[:1] == ["POINT_DATA"]:
            npoints = int(line[1])
        elif line[:1] == ["SCALARS"]:
            name, kind = line[1], line[2]
            i += 1  # LOOKUP_TABLE
            vals = [tokens[i + 1 + k] for k in range(npoints)]
            fields[name] = (np.array(vals, dtype=int) if kind == "int"
                            else np.array(vals, dtype=float))
            i += npoints
        elif line[:1] == ["VECTORS"]:
            name = line[1]
            rows = [tokens[i + 1 + k].split() for k in range(npoints)]
            fields[name] = np.array(rows, dtype=float)[:, :2]
            i += npoints
        i += 1
    return fields


class HistoryWriter:
    """Appends one CSV row per accepted iteration, flushing each row."""

    def __init__(self, path):
        self._fh = open(path, "w", encoding="ascii", newline="\n")
        self._fh.write(HISTORY_HEADER + "\n")
        self._fh.flush()

    def write(self, rec):
        vals = ([rec.iteration, rec.j] + list(rec.ah_entries)
                + list(rec.volumes) + list(rec.multipliers)
                + [rec.dt, rec.ls_trials])
        row = [str(rec.iteration)]
        row += [f"{float(v):.11e}" for v in vals[1:-1]]
        row.append(str(rec.ls_trials))
        self._fh.write(",".join(row) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def export_history(history, path):
    """Write a complete RunHistory as CSV in one go."""
    with HistoryWriter(path) as w:
        for rec in history.records:
            w.write(rec)


def save_state(state, path):
    """Serialize an OptState so a run can resume bit-exactly."""
    np.savez(
        path,
        phi1=state.levelsets.phi1,
        phi2=state.levelsets.phi2,
        since_reinit=state.levelsets.since_reinit,
        multipliers=state.cstate.multipliers,
        penalties=state.cstate.penalties,
        mode=state.cstate.mode,
        constrained=state.cstate.constrained,
        volumes=state.cstate.volumes,
        chi=state.solutions.chi,
        residuals=state.solutions.residuals,
        material_hash=state.solutions.material_hash,
        ah=state.ah.m,
        j=state.j,
        iteration=state.iteration,
        stagnation_count=state.stagnation_count,
        frozen=state.frozen,
    )


def load_state(path):
    from . import levelset, optimizer
    with np.load(path, allow_pickle=False) as z:
        mls = levelset.MultiLevelSet(z["phi1"], z["phi2"],
                                     int(z["since_reinit"]))
        cstate = velocity.ConstraintState(
            z["multipliers"], z["penalties"], str(z["mode"]),
            z["constrained"], z["volumes"])
        sols = fem.CellSolutions(z["chi"], z["residuals"],
                                 str(z["material_hash"]))
        ah = materials.ElasticTensor4(z["ah"])
        frozen = bool(z["frozen"]) if "frozen" in z.files else False
        return optimizer.OptState(mls, cstate, sols, ah, float(z["j"]),
                                  int(z["iteration"]),
                                  int(z["stagnation_count"]), frozen)
