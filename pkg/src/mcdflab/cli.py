"""Command-line front end: solve, sweep, check.

Exit codes: 0 success, 1 failed invariant families (check), 2 configuration
errors, 3 solver failures or an uncertified solution.

Thread-count environment variables are set before numpy is imported, so the
heavy modules are imported inside main(). The default is single-threaded
execution for bit-stable outputs; --threads > 1 opts into parallel BLAS at
the cost of last-digit determinism.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _set_threads(n: int) -> None:
    for var in _THREAD_VARS:
        os.environ[var] = str(n)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcdf",
        description="Finite-basis multiconfiguration Dirac-Fock laboratory.",
    )
    parser.add_argument("--threads", type=int, default=1, metavar="INT",
                        help="BLAS/OpenMP thread count (default 1, bit-stable)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one coupled solve and certify it")
    sweep = sub.add_parser("sweep", help="run a light-speed sweep from a c-list")
    for p in (solve, sweep):
        p.add_argument("--config", required=True, metavar="PATH",
                       help="TOML run configuration")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, default=None, metavar="INT",
                       help="seed override for multi-start perturbations")

    check = sub.add_parser("check", help="run the cross-module invariant suite")
    check.add_argument("--scale", choices=("tiny", "small", "default"),
                       default="default", help="problem-size preset")
    check.add_argument("--seed", type=int, default=0, metavar="INT")
    return parser


def _load(args):
    from .config import load_run_config

    run = load_run_config(args.config)
    if args.out is not None:
        run = run.with_out_dir(args.out)
    if args.seed is not None:
        from dataclasses import replace

        run = replace(run, seed=args.seed)
    return run


def _resolve_gamma(run, space, basis_nr, nuc):
    """MCHF reference chain; also resolves gamma_floor = 'auto'."""
    from dataclasses import replace

    from .mchf import occupation_floor
    from .sweep import reference_chain

    chain = reference_chain(space, basis_nr, nuc)[-1]
    solver_cfg = run.solver
    if run.gamma_auto:
        solver_cfg = replace(solver_cfg,
                             gamma_floor=0.5 * occupation_floor(space, chain))
    return chain, solver_cfg


def _initial_state(run, space, basis, nuc, chain, rng):
    import numpy as np

    from .ci import fix_phase, retract_to_floor
    from .documents import load_result
    from .mchf import embed_to_positive
    from .solver import SplitState

    if run.problem.warm_start is not None:
        loaded = load_result(run.problem.warm_start)
        doc = loaded.problem
        if (doc["n_orbitals"] != space.n_orbitals
                or doc["n_particles"] != space.n_particles
                or doc["mode_bound"] != basis.mode_bound):
            raise _config_error(
                "problem.warm_start: stored problem "
                f"(K={doc['n_orbitals']}, N={doc['n_particles']}, "
                f"mode_bound={doc['mode_bound']}) does not match this run"
            )
        return loaded.state
    state = embed_to_positive(space, chain, basis)
    if rng is None:
        return state
    delta = 0.02 * (rng.standard_normal(state.a.shape)
                    + 1j * rng.standard_normal(state.a.shape))
    a = state.a + delta
    a = fix_phase(a / np.linalg.norm(a))
    return SplitState(a=a, psi_plus=state.psi_plus, psi_minus=state.psi_minus)


def _config_error(message: str):
    from .errors import ConfigError

    return ConfigError(message)


def cmd_solve(args) -> int:
    import numpy as np

    from .documents import dump_json, result_document, write_text
    from .solver import certify_solution, outer_minimize

    run = _load(args)
    problem = run.problem
    if problem.c is None:
        raise _config_error("problem.c is required for solve "
                            "(c_values is a sweep setting)")
    space = problem.space()
    basis = problem.basis()
    nuc = problem.nuclear()
    chain, solver_cfg = _resolve_gamma(run, space, basis, nuc)

    rng_master = np.random.default_rng(run.seed)
    best = None
    n_starts = 1 if problem.warm_start is not None else run.multi_start
    for start in range(n_starts):
        rng = rng_master if start > 0 else None
        initial = _initial_state(run, space, basis, nuc, chain, rng)
        report = outer_minimize(space, initial, solver_cfg, basis, nuc)
        if best is None or report.energy.total < best.energy.total:
            best = report

    certificate = certify_solution(best)
    doc = result_document(best, certificate, seed=run.seed,
                          multi_start=run.multi_start)
    out_path = Path(run.outputs.out_dir) / run.outputs.result_name
    write_text(out_path, dump_json(doc))

    n = space.n_particles
    shifted = best.ci_energy - n * basis.light_speed ** 2
    print(f"status {best.status}  iterations {best.iterations}")
    print(f"energy {best.energy.total!r}  shifted {shifted!r}")
    print(f"residual_df1 {best.residual_df1:.3e}  "
          f"residual_df2 {best.residual_df2:.3e}  min_occ {best.min_occ:.6f}")
    verdict = "PASS" if certificate.passed else "FAIL"
    print(f"certificate {verdict}  wrote {out_path}")
    if not certificate.passed:
        for name in certificate.failed_names():
            print(f"  failed: {name}")
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep(args) -> int:
    from dataclasses import asdict

    from .documents import dump_json, sweep_document, sweep_table, write_text
    from .sweep import sweep_c

    run = _load(args)
    problem = run.problem
    if problem.c_values is None:
        raise _config_error("problem.c_values is required for sweep")
    space = problem.space()
    basis = problem.basis(problem.c_values[0])
    nuc = problem.nuclear()
    _, solver_cfg = _resolve_gamma(run, space, basis, nuc)

    result = sweep_c(space, problem.c_values, basis, nuc, solver_cfg)

    out_dir = Path(run.outputs.out_dir)
    doc = sweep_document(result, problem=asdict(problem),
                         solver=asdict(solver_cfg), seed=run.seed)
    json_path = out_dir / run.outputs.sweep_name
    table_path = out_dir / run.outputs.table_name
    write_text(json_path, dump_json(doc))
    write_text(table_path, sweep_table(result))

    for pt in result.points:
        verdict = "ok" if pt.certified else "FLAGGED"
        print(f"c {pt.record.c:g}  shifted {pt.record.energy_shifted!r}  "
              f"gap {pt.record.gap_to_IK:.6e}  [{verdict}]")
    print(f"certified {result.n_certified}/{len(result.points)}  "
          f"gap_monotone {result.gap_monotone}  wrote {json_path} {table_path}")
    if 2 * result.n_certified >= len(result.points):
        return EXIT_OK
    return EXIT_SOLVER


def cmd_check(args) -> int:
    from .checks import run_checks

    families = run_checks(scale=args.scale, seed=args.seed)
    all_passed = True
    for fam in families:
        verdict = "PASS" if fam.passed else "FAIL"
        print(f"{verdict}  {fam.name}")
        if not fam.passed:
            all_passed = False
            for ch in fam.checks:
                if not ch.passed:
                    print(f"      {ch.name}: value {ch.value:.3e} "
                          f"vs threshold {ch.threshold:.3e}")
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be a positive integer")
    _set_threads(args.threads)

    from .errors import (ConfigError, SolverFailure,
                         SubcriticalLightSpeedError)

    handlers = {"solve": cmd_solve, "sweep": cmd_sweep, "check": cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, SubcriticalLightSpeedError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
