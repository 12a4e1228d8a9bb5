"""Command-line surface: optimize, homogenize, validate, presets."""

import argparse
import os
import sys


def build_parser():
    parser = argparse.ArgumentParser(
        prog="auxcell",
        description="Inverse homogenization of periodic four-phase unit "
                    "cells with a two-level-set method.")
    parser.add_argument("--threads", type=int, default=None,
                        help="BLAS/OpenMP thread count (default: "
                             "AUXCELL_THREADS env var or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="run the full design loop")
    p_hom = sub.add_parser("homogenize",
                           help="one forward solve; print A^H and nu_app")
    p_val = sub.add_parser("validate",
                           help="run the oracle/invariant suite")
    sub.add_parser("presets", help="list the built-in example presets")

    for p in (p_opt, p_hom):
        p.add_argument("--config", metavar="PATH",
                       help="TOML configuration file")
        p.add_argument("--preset", metavar="NAME",
                       help="start from a named preset")
    p_opt.add_argument("--out-dir", default="out",
                       help="output directory (default: out)")
    p_opt.add_argument("--iterations", type=int, default=None,
                       help="override the configured iteration count")
    p_val.add_argument("--quick", action="store_true",
                       help="smaller meshes, fewer random trials")
    return parser


def _set_threads(count):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(count)


def _load(args):
    from . import config as cfgmod
    if args.config and args.preset:
        raise cfgmod.ConfigError("give either --config or --preset, not both")
    if args.preset:
        return cfgmod.preset_config(args.preset)
    if args.config:
        return cfgmod.load_config(args.config)
    return cfgmod.Config().validate()


def cmd_optimize(args):
    from . import runner
    cfg = _load(args)
    history, final = runner.run_config(cfg, args.out_dir,
                                       iterations=args.iterations)
    last = history.records[-1]
    print(f"finished at iteration {last.iteration}: J = {last.j:.6e}")
    print("A1111 = %.6f  A1122 = %.6f  A2222 = %.6f  A1212 = %.6f"
          % last.ah_entries)
    print("volumes:", " ".join(f"{v:.4f}" for v in last.volumes))
    print(f"outputs in {args.out_dir}/")
    return 0


def cmd_homogenize(args):
    from . import runner
    from .homogenization import objective
    cfg = _load(args)
    ah, nu, j = runner.homogenize_config(cfg)
    for key in ("1111", "1122", "2222", "1212"):
        print(f"A{key} = {ah.entry(key):.9g}")
    print(f"nu_app = {nu:.9g}")
    print(f"J = {j:.9g}")
    return 0


def cmd_validate(args):
    from . import checks
    quick = bool(getattr(args, "quick", False))
    failures = 0

    rel, chi_max = checks.uniform_cell_check(n=20)
    ok = rel <= 1e-8 and chi_max <= 1e-10
    print(f"uniform-cell exactness: rel={rel:.2e} chi_max={chi_max:.2e} "
          f"{'PASS' if ok else 'FAIL'}")
    failures += not ok

    err, per_entry = checks.laminate_check(n=40 if quick else 100)
    ok = err <= 0.02
    print(f"laminate closed form:   worst rel={err:.2e} "
          f"{'PASS' if ok else 'FAIL'}")
    failures += not ok

    errors = checks.gradient_check_suite(
        n=30 if quick else 50, trials=4 if quick else 10)
    ok = errors.max() <= 0.05
    print(f"gradient fidelity:      worst rel={errors.max():.2e} "
          f"{'PASS' if ok else 'FAIL'}")
    failures += not ok

    return 1 if failures else 0


def cmd_presets(args):
    from .config import PRESETS
    for name in PRESETS:
        print(name)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads or os.environ.get("AUXCELL_THREADS") or 1
    _set_threads(int(threads))

    from .errors import AuxcellError
    handlers = {
        "optimize": cmd_optimize,
        "homogenize": cmd_homogenize,
        "validate": cmd_validate,
        "presets": cmd_presets,
    }
    try:
        return handlers[args.command](args)
    except AuxcellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
