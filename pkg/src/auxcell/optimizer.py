"""Outer optimization loop: solve, build velocities, line-search the
Hamilton-Jacobi transport, update multipliers, reinitialize periodically.

There is no stopping criterion: the loop runs a fixed number of
iterations and the backtracking line search keeps the objective
non-increasing over accepted iterates. If even the tiny fallback step
would increase the objective the shape is kept for that iteration and a
stagnation flag is raised; the multipliers still advance, which is
usually enough to unstick the next iteration.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import fem, homogenization, levelset, velocity
from .errors import SolverError


@dataclass
class Problem:
    """Everything that stays fixed during a run."""

    mesh: object
    phases: object
    spec: object
    alpha: float                 # velocity-extension smoothing length
    cg_tol: float = 1e-9
    beta_step: float = 0.1
    beta_growth: float = 1.5
    beta_max: float = 1e3
    reinit_every: int = 5
    reinit_steps: int = 50
    max_ls_trials: int = 8


@dataclass
class OptState:
    levelsets: object            # MultiLevelSet (signed-distance fields)
    cstate: object               # ConstraintState
    solutions: object            # CellSolutions
    ah: object                   # ElasticTensor4
    j: float
    iteration: int = 0
    stagnation_count: int = 0
    # set when an iteration rejected every trial while the multipliers
    # were already exactly zero: the next iteration would recompute the
    # identical velocity and reject again, so it can be skipped outright
    frozen: bool = False


@dataclass
class Record:
    iteration: int
    j: float
    ah_entries: tuple            # (1111, 1122, 2222, 1212)
    volumes: tuple
    multipliers: tuple
    dt: float
    ls_trials: int
    stagnated: bool = False


@dataclass
class RunHistory:
    records: list = field(default_factory=list)

    def append(self, rec):
        self.records.append(rec)

    def j_values(self):
        return np.array([r.j for r in self.records])


def evaluate(problem, d1, d2, warm_start=None):
    """Forward pipeline: material -> cell solves -> A^H -> J."""
    dmats = fem.material_field(problem.mesh, d1, d2, problem.phases)
    sols = fem.solve_cell_problems(problem.mesh, dmats, rtol=problem.cg_tol,
                                   warm_start=warm_start)
    ah = homogenization.homogenized_tensor(problem.mesh, dmats, sols)
    j = homogenization.objective(ah, problem.spec)
    return sols, ah, j


def initial_state(problem, mls, cstate, reinit_first=True):
    """Reinitialize the initial level sets and evaluate the starting point."""
    if reinit_first:
        mls = levelset.MultiLevelSet(
            levelset.reinitialize(problem.mesh, mls.phi1, problem.reinit_steps),
            levelset.reinitialize(problem.mesh, mls.phi2, problem.reinit_steps))
    sols, ah, j = evaluate(problem, mls.phi1, mls.phi2)
    cstate = cstate.copy()
    cstate.volumes = velocity.phase_volumes(problem.mesh, mls.phi1, mls.phi2,
                                            problem.phases)
    return OptState(mls, cstate, sols, ah, j)


def _record(state, dt, trials, stagnated):
    ah = state.ah
    return Record(
        iteration=state.iteration,
        j=state.j,
        ah_entries=(ah.entry("1111"), ah.entry("1122"),
                    ah.entry("2222"), ah.entry("1212")),
        volumes=tuple(state.cstate.volumes),
        multipliers=tuple(state.cstate.multipliers),
        dt=dt, ls_trials=trials, stagnated=stagnated)


def descent_velocities(problem, state):
    """Extended, regularized transport velocities for both level sets."""
    mesh, phases, spec = problem.mesh, problem.phases, problem.spec
    d1, d2 = state.levelsets.phi1, state.levelsets.phi2
    vols = velocity.phase_volumes(mesh, d1, d2, phases)
    l_eff = state.cstate.effective_multipliers(vols, phases.volume_targets)
    fields = []
    for which, d in ((1, d1), (2, d2)):
        _, g_elem = velocity.velocity_integrand(
            which, mesh, d1, d2, phases, state.solutions, state.ah, spec,
            l_eff)
        theta = velocity.extend_velocity(mesh, g_elem, d, phases,
                                         problem.alpha)
        fields.append(theta)
    return fields[0], fields[1], vols


def step(problem, state):
    """One accepted outer iteration; returns (new_state, record)."""
    if state.frozen:
        # deterministic repeat of a fully rejected iteration: nothing in
        # the velocity inputs can have changed, so skip the line search
        new_state = replace(state, iteration=state.iteration + 1,
                            stagnation_count=state.stagnation_count + 1)
        return new_state, _record(new_state, 0.0, 0, True)
    mesh = problem.mesh
    mls = state.levelsets
    v1, v2, _ = descent_velocities(problem, state)
    vmax = max(float(np.abs(v1).max()), float(np.abs(v2).max()))
    dt0 = levelset.cfl_timestep(np.array([vmax]), mesh.dx)
    reinit_due = (mls.since_reinit + 1) >= problem.reinit_every

    def try_step(dt):
        p1 = levelset.transport(mesh, mls.phi1, v1, dt)
        p2 = levelset.transport(mesh, mls.phi2, v2, dt)
        if reinit_due:
            p1 = levelset.reinitialize(mesh, p1, problem.reinit_steps)
            p2 = levelset.reinitialize(mesh, p2, problem.reinit_steps)
        sols, ah, j = evaluate(problem, p1, p2, warm_start=state.solutions)
        return p1, p2, sols, ah, j

    accepted = None
    trials = 0
    dt = dt0
    for k in range(problem.max_ls_trials):
        trials += 1
        dt = dt0 / (2.0 ** k)
        result = try_step(dt)
        if result[4] <= state.j:
            accepted = result
            break
    stagnated = False
    if accepted is None:
        # tiny fallback step; keep the shape if even that increases J so
        # accepted iterates stay monotone
        trials += 1
        dt = 1e-3 * dt0
        result = try_step(dt)
        stagnated = True
        if result[4] <= state.j:
            accepted = result

    if accepted is not None:
        p1, p2, sols, ah, j = accepted
        new_mls = levelset.MultiLevelSet(
            p1, p2, 0 if reinit_due else mls.since_reinit + 1)
    else:
        dt = 0.0
        # the shape is unchanged, so the reinitialization clock does not
        # advance (otherwise a rejected iteration latches reinit_due and
        # its small J jump taxes every later trial)
        new_mls = levelset.MultiLevelSet(mls.phi1.copy(), mls.phi2.copy(),
                                         mls.since_reinit)
        sols, ah, j = state.solutions, state.ah, state.j

    vols = velocity.phase_volumes(mesh, new_mls.phi1, new_mls.phi2,
                                  problem.phases)
    it = state.iteration + 1
    if accepted is not None:
        grow = (state.cstate.mode == "augmented" and it % 5 == 0)
        cstate = velocity.multiplier_update(
            state.cstate, vols, problem.phases.volume_targets,
            beta_step=problem.beta_step, beta_growth=problem.beta_growth,
            beta_max=problem.beta_max, grow_penalty=grow)
    else:
        # the shape did not move: the constraint push has overwhelmed the
        # objective descent (re-integrating the same volume error would
        # only ratchet it further), so decay the multipliers until the
        # J-monotone line search can accept a step again
        cstate = state.cstate.copy()
        cstate.multipliers = 0.5 * cstate.multipliers
        cstate.multipliers[np.abs(cstate.multipliers) < 1e-8] = 0.0
        cstate.volumes = np.asarray(vols, dtype=float).copy()

    freeze = (accepted is None
              and not np.any(state.cstate.multipliers)
              and not np.any(cstate.multipliers))
    new_state = OptState(
        levelsets=new_mls, cstate=cstate, solutions=sols, ah=ah, j=j,
        iteration=it,
        stagnation_count=state.stagnation_count + 1 if stagnated else 0,
        frozen=freeze)
    return new_state, _record(new_state, dt, trials, stagnated)


def run(problem, state, iterations, on_record=None, on_snapshot=None,
        snapshot_every=0):
    """Execute a fixed number of iterations from the given state.

    on_record(record) fires after every accepted iteration (so a killed
    run leaves a valid partial history); on_snapshot(state) fires at
    iteration 0 and every snapshot_every accepted iterations.
    """
    history = RunHistory()
    rec0 = _record(state, 0.0, 0, False)
    history.append(rec0)
    if on_record:
        on_record(rec0)
    if on_snapshot and snapshot_every >= 0:
        on_snapshot(state)
    for _ in range(int(iterations)):
        state, rec = step(problem, state)
        history.append(rec)
        if on_record:
            on_record(rec)
        if on_snapshot and snapshot_every > 0 and \
                state.iteration % snapshot_every == 0:
            on_snapshot(state)
        if state.stagnation_count >= 3 and rec.stagnated:
            # flagged but the loop continues: the budget is fixed a priori
            pass
    return history, state
