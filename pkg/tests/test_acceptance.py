"""The nine acceptance criteria, one test each, at their stated
tolerances. Each test prints a single PASS/FAIL line (visible with
plain pytest -v runs).

The four full-size preset runs (n=100, 200 iterations) are shared by
criteria 5-7 through a session-scoped fixture, so the expensive part
runs once.
"""

import time

import numpy as np
import pytest

from auxcell import (checks, config as cfgmod, fem, homogenization,
                     levelset, materials, optimizer, output, runner)


def _verdict(num, ok, detail, capsys=None):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} — {detail}"
    if capsys is not None:
        # bypass output capture so the line shows in plain pytest -v runs
        with capsys.disabled():
            print(flush=True)
            print(line, flush=True)
    else:
        print(line)
    assert ok, line


@pytest.fixture(scope="session")
def preset_runs():
    """name -> (cfg, history, final_state, wall_seconds) at n=100 x 200."""
    out = {}
    for name in cfgmod.PRESETS:
        cfg = cfgmod.preset_config(name)
        cfg.snapshot_every = 0
        problem = runner.build_problem(cfg)
        state = runner.build_state(cfg, problem)
        t0 = time.monotonic()
        history, final = optimizer.run(problem, state, cfg.iterations)
        out[name] = (cfg, history, final, time.monotonic() - t0)
    return out


def test_criterion_1_homogeneous_exactness(capsys):
    t0 = time.monotonic()
    rel, chi_max = checks.uniform_cell_check(n=20)
    wall = time.monotonic() - t0
    ok = rel <= 1e-8 and chi_max <= 1e-10 and wall < 1.0
    _verdict(1, ok, capsys=capsys, detail=f"uniform cell rel={rel:.2e} chi={chi_max:.2e} "
                    f"wall={wall:.2f}s")


def test_criterion_2_laminate_oracle(capsys):
    t0 = time.monotonic()
    worst, per_entry = checks.laminate_check(n=100)
    wall = time.monotonic() - t0
    ok = worst <= 0.02 and wall < 30.0
    _verdict(2, ok, capsys=capsys, detail=f"laminate worst rel={worst:.2e} wall={wall:.1f}s")


def test_criterion_3_symmetry_and_bounds(capsys):
    t0 = time.monotonic()
    from auxcell import mesh as meshmod
    m = meshmod.build_mesh(16)
    phases = materials.PhaseSet.from_moduli(
        (0.91, 0.0001, 1.82, 0.0001), (0.3,) * 4, eps=2 * m.dx)
    rng = np.random.default_rng(7)
    worst_sym = 0.0
    ok = True
    for _ in range(50):
        d1 = checks.smooth_random_field(m, rng, amplitude=0.08)
        d2 = checks.smooth_random_field(m, rng, amplitude=0.08)
        dmats = fem.material_field(m, d1, d2, phases)
        sols = fem.solve_cell_problems(m, dmats)
        ah = homogenization.homogenized_tensor(m, dmats, sols)
        worst_sym = max(worst_sym, float(np.abs(ah.m - ah.m.T).max()))
        ok &= ah.is_positive_definite()
        voigt = homogenization.volume_averaged_tensor(m, dmats)
        reuss = np.linalg.inv(
            np.einsum("e,eij->ij", m.areas,
                      np.linalg.inv(dmats)))
        for probe in np.eye(3):
            ok &= ah.quad(probe) <= voigt.quad(probe) + 1e-10
            ok &= ah.quad(probe) >= float(probe @ reuss @ probe) - 1e-10
    wall = time.monotonic() - t0
    ok &= worst_sym <= 1e-12 and wall < 60.0
    _verdict(3, ok, capsys=capsys, detail=f"50 random states, sym={worst_sym:.1e} "
                    f"wall={wall:.1f}s")


def test_criterion_4_gradient_fidelity(capsys):
    errors = checks.gradient_check_suite(n=50, trials=10)
    ok = errors.max() <= 0.05
    _verdict(4, ok, capsys=capsys, detail=f"10 directional checks at n=50, worst "
                    f"rel={errors.max():.2e}")


def test_criterion_5_monotone_descent(preset_runs, capsys):
    detail = []
    ok = True
    for name, (cfg, history, final, wall) in preset_runs.items():
        js = history.j_values()
        mono = bool(np.all(np.diff(js) <= 1e-12))
        ok &= mono and len(js) == cfg.iterations + 1
        detail.append(f"{name}: J {js[0]:.4f}->{js[-1]:.4f} "
                      f"{'monotone' if mono else 'NOT MONOTONE'}")
    _verdict(5, ok, capsys=capsys, detail="; ".join(detail))


def test_criterion_6_example1_reproduction(preset_runs, capsys):
    cfg, history, final, wall = preset_runs["example1"]
    a = final.ah
    entries = (a.entry("1111"), a.entry("1122"), a.entry("2222"))
    box = all(abs(x - t) <= 0.05
              for x, t in zip(entries, (0.12, -0.09, 0.12)))
    try:
        nu = homogenization.apparent_poisson(a)
    except Exception:
        nu = float("nan")
    alt = final.j <= 0.002 and nu <= -0.7
    ok = (box or alt) and wall <= 30 * 60
    _verdict(6, ok, capsys=capsys, detail=f"A=({entries[0]:+.4f},{entries[1]:+.4f},"
                    f"{entries[2]:+.4f}) J={final.j:.5f} nu={nu:+.3f} "
                    f"box={box} wall={wall/60:.1f}min")


def test_criterion_7_augmented_volumes(preset_runs, capsys):
    detail = []
    ok = True
    for name in ("example3", "example4"):
        cfg, history, final, wall = preset_runs[name]
        rec = history.records[-1]
        weak_err = abs(rec.volumes[0] - cfg.volume_targets[0])
        stiff_over = rec.volumes[2] - cfg.volume_targets[2]
        ok &= weak_err <= 0.03
        detail.append(f"{name}: |V1-t1|={weak_err:.3f} "
                      f"stiff overshoot={stiff_over:+.3f}")
    _verdict(7, ok, capsys=capsys, detail="; ".join(detail))


def test_criterion_8_levelset_unit_suite(capsys):
    t0 = time.monotonic()
    from auxcell import mesh as meshmod
    ok = True
    for n in (16, 50):
        m = meshmod.build_mesh(n)
        x, y = m.nodes[:, 0], m.nodes[:, 1]
        phi = np.hypot(x, y) - 0.3
        # circle redistancing: near fixed point over the band (subcell
        # anchors are linear-interpolation estimates, so the error
        # scales with dx^2 * curvature; dx/3 is comfortably subcell)
        out = levelset.reinitialize(m, phi, 100)
        band = np.abs(phi) <= 2 * m.dx
        ok &= float(np.abs(out - phi)[band].max()) <= m.dx / 3.0
        # normal motion grows the circle
        v = np.ones(m.n_nodes)
        dt = levelset.cfl_timestep(v, m.dx)
        moved = levelset.transport(m, out, v, dt)
        ok &= bool(np.all(moved[band] <= out[band] + 1e-12))
        # transport monotonicity: velocity ordering carries to the fields
        slower = levelset.transport(m, out, 0.5 * v, dt)
        ok &= bool(np.all(moved[band] <= slower[band] + 1e-12))
        # phase densities partition unity
        phases = materials.PhaseSet.from_moduli(
            (0.91, 0.0001, 1.82, 0.0001), (0.3,) * 4, eps=2 * m.dx)
        dens = materials.phase_densities(out, -out, phases)
        ok &= bool(np.allclose(np.sum(dens, axis=0), 1.0, atol=1e-12))
    # Heaviside endpoints and monotonicity
    eps = 0.04
    t = np.linspace(-2 * eps, 2 * eps, 801)
    h = materials.heaviside(t, eps)
    ok &= h[0] == 0.0 and h[-1] == 1.0
    ok &= bool(np.all(np.diff(h) >= -1e-15))
    wall = time.monotonic() - t0
    ok &= wall < 30.0
    _verdict(8, ok, capsys=capsys, detail=f"redistancing/transport/partition/Heaviside at "
                    f"n=16,50, wall={wall:.1f}s")


def test_criterion_9_determinism_and_restart(tmp_path, capsys):
    cfg = cfgmod.Config(n=16, iterations=5, snapshot_every=0)
    cfg.validate()

    def run_once():
        problem = runner.build_problem(cfg)
        state = runner.build_state(cfg, problem)
        return optimizer.run(problem, state, cfg.iterations)

    h1, s1 = run_once()
    h2, s2 = run_once()
    same_hist = all(
        r1.j == r2.j and r1.ah_entries == r2.ah_entries
        and r1.volumes == r2.volumes and r1.multipliers == r2.multipliers
        and r1.dt == r2.dt and r1.ls_trials == r2.ls_trials
        for r1, r2 in zip(h1.records, h2.records))
    same_state = (np.array_equal(s1.levelsets.phi1, s2.levelsets.phi1)
                  and np.array_equal(s1.levelsets.phi2, s2.levelsets.phi2))

    # state round-trip reproduces the next iteration bit-exactly
    problem = runner.build_problem(cfg)
    state = runner.build_state(cfg, problem)
    _, mid = optimizer.run(problem, state, 3)
    path = tmp_path / "state.npz"
    output.save_state(mid, path)
    back = output.load_state(path)
    n1, _ = optimizer.step(problem, mid)
    n2, _ = optimizer.step(problem, back)
    same_next = (np.array_equal(n1.levelsets.phi1, n2.levelsets.phi1)
                 and np.array_equal(n1.levelsets.phi2, n2.levelsets.phi2)
                 and n1.j == n2.j)
    ok = same_hist and same_state and same_next
    _verdict(9, ok, capsys=capsys, detail=f"identical reruns={same_hist and same_state}, "
                    f"restart next-iteration={same_next}")
