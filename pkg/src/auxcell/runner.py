"""Glue between a Config and a full optimization run with file outputs."""

import os

import numpy as np

from . import config as cfgmod
from . import fem, homogenization, levelset, materials, mesh as meshmod
from . import optimizer, output, velocity
from .errors import ConfigError


def build_problem(cfg):
    """Instantiate mesh, phases and objective from a validated Config."""
    m = meshmod.build_mesh(cfg.n)
    eps = cfg.eps_mult * m.dx
    phases = materials.PhaseSet.from_moduli(cfg.E, cfg.nu,
                                            cfg.volume_targets, eps)
    spec = homogenization.ObjectiveSpec(dict(cfg.target), dict(cfg.weights))
    return optimizer.Problem(
        mesh=m, phases=phases, spec=spec,
        alpha=cfg.alpha_mult * m.dx,
        cg_tol=cfg.cg_tol,
        beta_step=cfg.beta_step,
        beta_growth=cfg.beta_growth,
        beta_max=cfg.beta_max,
        reinit_every=cfg.reinit_every,
        reinit_steps=cfg.reinit_steps,
        max_ls_trials=cfg.max_ls_trials,
    )


def _init_spec(mesh, spec):
    spec = dict(spec)
    if spec.get("pattern") == "file":
        path = spec.get("path")
        key = spec.get("key", "phi1")
        if not path:
            raise ConfigError("init pattern 'file' needs a path")
        with np.load(path, allow_pickle=False) as z:
            values = np.array(z[key], dtype=float)
        return {"pattern": "values", "values": values}
    return spec


def build_state(cfg, problem, reinit_first=True):
    """Initial OptState from the config's init patterns."""
    m = problem.mesh
    mls = levelset.init_pattern(m,
                                _init_spec(m, cfg.init["set1"]),
                                _init_spec(m, cfg.init["set2"]))
    cstate = velocity.ConstraintState(
        multipliers=np.zeros(4),
        penalties=np.full(4, cfg.beta0),
        mode=cfg.mode,
        constrained=np.array(cfg.constrained, dtype=bool),
    )
    return optimizer.initial_state(problem, mls, cstate,
                                   reinit_first=reinit_first)


def run_config(cfg, out_dir, iterations=None):
    """Full run with manifest, incremental history CSV, VTK snapshots and
    a final state file. Returns (history, final_state)."""
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    output._atomic_write(os.path.join(out_dir, "manifest.toml"),
                         cfgmod.serialize_config(cfg) + "\n")

    problem = build_problem(cfg)
    state = build_state(cfg, problem)
    if iterations is None:
        iterations = cfg.iterations

    writer = output.HistoryWriter(os.path.join(out_dir, "history.csv"))

    def on_snapshot(s):
        path = os.path.join(out_dir, f"fields_{s.iteration:05d}.vtk")
        output.export_fields(problem.mesh, problem.phases, s.levelsets,
                             s.solutions, path)

    try:
        history, final = optimizer.run(
            problem, state, iterations,
            on_record=writer.write,
            on_snapshot=on_snapshot,
            snapshot_every=cfg.snapshot_every)
    finally:
        writer.close()

    output.save_state(final, os.path.join(out_dir, "state.npz"))
    return history, final


def homogenize_config(cfg):
    """One forward solve: returns (A^H tensor, apparent Poisson ratio, J)."""
    cfg.validate()
    problem = build_problem(cfg)
    state = build_state(cfg, problem)
    nu = homogenization.apparent_poisson(state.ah)
    return state.ah, nu, state.j
