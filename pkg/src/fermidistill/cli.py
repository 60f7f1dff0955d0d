"""Command-line front-end.

Single-object results are printed as JSON, grids and sweeps as CSV, so
any plotting tool can consume the output.  Exit codes: 0 success,
1 domain error (invalid state file, unreachable target, ...), 2 usage
error.  All randomized commands take --seed and default to the
FERMIDISTILL_SEED environment variable, making outputs reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import closed_forms, lattice
from .fock import verify_all
from .protocol import run_protocol, sample_suboptimal, scan_m
from .states import ValidationError, load_covariance, save_covariance, validate


def _default_seed() -> int:
    return int(os.environ.get("FERMIDISTILL_SEED", "0"))


def _parse_range(text: str) -> list[int]:
    """start:stop:step (stop exclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (int(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        return list(range(start, stop, step))
    return [int(p) for p in text.split(",") if p]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    state, _ = load_covariance(args.state)
    report = validate(state)
    print(report.summary())
    print("valid" if report.passed else "invalid")
    return 0 if report.passed else 1


def _cmd_protocol(args) -> int:
    state, split = load_covariance(args.state)
    report = run_protocol(state, split, args.m)
    payload = report.to_dict()
    if args.sample_suboptimal:
        sample = sample_suboptimal(state, split, args.m, args.sample_suboptimal, args.seed)
        payload["sampled"] = {
            "trials": args.sample_suboptimal,
            "best_pf": sample.best_pf,
            "best_p": sample.best_p,
            "best_f": sample.best_f,
            "best_trial": sample.trial,
            "exceeds_optimal": bool(sample.best_pf > report.pf + 1e-9),
        }
    _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
    return 0


def _cmd_scan_m(args) -> int:
    state, split = load_covariance(args.state)
    reports, reason = scan_m(state, split, args.m_max)
    payload = {"reports": [r.to_dict() for r in reports], "truncated": reason}
    _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
    return 0


def _cmd_oracle(args) -> int:
    state, split = load_covariance(args.state)
    if state.n_modes > 6:
        raise ValidationError("oracle verification is limited to 6 modes")
    from .protocol import optimal_choice
    from .states import maximally_entangled_projection, projection_frame, restrict

    choice = optimal_choice(state, split, args.m)
    # restrict to the kept modes and express the canonical target there
    restricted, rsplit = restrict(state, split, choice.d)
    ua = projection_frame(choice.d.d_a)
    ub = projection_frame(choice.d.d_b)
    vp = ua.T @ choice.v @ ub
    target = maximally_entangled_projection(vp, rsplit, dim=restricted.dim)
    report = verify_all(restricted, target, rsplit)
    print(report.summary())
    ok = report.max_deviation <= args.tol
    print("agreement" if ok else "DISAGREEMENT")
    return 0 if ok else 1


def _cmd_closed_form(args) -> int:
    if args.family == "two-mode":
        params = closed_forms.TwoModeParams(*args.params)
        value, optimizer = closed_forms.two_mode_max_fidelity(params)
        payload = {
            "params": vars(params),
            "correlation": closed_forms.two_mode_correlation(params).tolist(),
            "max_fidelity": value,
            "optimizer": optimizer.tolist(),
        }
        if args.emit:
            save_covariance(
                args.emit, closed_forms.two_mode_covariance(params), closed_forms.two_mode_split()
            )
            payload["emitted"] = args.emit
        _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
        return 0
    if args.family == "four-mode":
        params = closed_forms.FourModeParams(*args.params)
        payload = {
            "params": vars(params),
            "p": closed_forms.four_mode_p(params),
            "f": closed_forms.four_mode_f(params),
            "g": closed_forms.four_mode_g(params),
            "max_singlet_fraction": closed_forms.max_singlet_fraction(params),
        }
        if args.emit:
            save_covariance(
                args.emit,
                closed_forms.four_mode_covariance(params),
                closed_forms.four_mode_split(),
            )
            payload["emitted"] = args.emit
        _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
        return 0
    # fg-scan
    xs = np.linspace(args.x[0], args.x[1], int(args.x[2]))
    ys = np.linspace(args.y[0], args.y[1], int(args.y[2]))
    rows = closed_forms.f_vs_g_scan(xs, ys, args.sigma)
    lines = ["x,y,sigma,f,g,f_ge_g"]
    for row in rows:
        if row["valid"]:
            lines.append(
                f"{row['x']!r},{row['y']!r},{row['sigma']!r},"
                f"{row['f']!r},{row['g']!r},{int(row['f_ge_g'])}"
            )
        else:
            lines.append(f"{row['x']!r},{row['y']!r},{row['sigma']!r},,,invalid")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_lattice(args) -> int:
    if args.action == "sweep":
        rows = lattice.sweep(
            args.L, args.N, m=args.m, tol=args.tol, seed=args.seed, jobs=args.jobs
        )
        _emit(lattice.sweep_to_csv(rows, m=args.m), args.out)
        return 0
    if args.action == "fit":
        samples = []
        for line in Path(args.data).read_text().splitlines()[1:]:
            cells = line.split(",")
            if len(cells) < 4 or "error" in line:
                continue
            L, N = int(cells[0]), int(cells[1])
            if N != args.N:
                continue
            value = float(cells[2 if args.value == "p" else 3])
            if not np.isfinite(value):
                continue
            samples.append((L, value))
        a, b, rms, warnings = lattice.fit_power_law(samples, args.L_min)
        payload = {
            "N": args.N,
            "a": a,
            "b": b,
            "residual": rms,
            "L_min": args.L_min,
            "points_used": len([s for s in samples if s[0] >= args.L_min and s[1] < 1.0]),
            "warnings": warnings,
        }
        _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
        return 0
    # minlen
    L, monotonic = lattice.min_length(
        args.N, args.x, args.L_lo, args.L_hi, m=args.m, seed=args.seed
    )
    payload = {"N": args.N, "x": args.x, "L": L, "monotonic": monotonic}
    _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
    return 0


def _cmd_bench(args) -> int:
    kern = lattice.kernel(args.L, -(args.N + args.L))
    rng = np.random.default_rng(args.seed)
    x = rng.standard_normal(args.L)
    for _ in range(3):
        kern.matvec(x)
    times = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        kern.matvec(x)
        times.append((time.perf_counter() - t0) * 1e3)
    t0 = time.perf_counter()
    _, iters = lattice.top_singular_triplets(kern, args.k, seed=args.seed)
    solve_ms = (time.perf_counter() - t0) * 1e3
    payload = {
        "L": args.L,
        "matvec_ms_median": float(np.median(times)),
        "matvec_ms_best": float(min(times)),
        "triplets_k": args.k,
        "triplets_iterations": iters,
        "triplets_ms": solve_ms,
    }
    _emit(json.dumps(payload, sort_keys=True, indent=2), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermidistill",
        description="Entanglement distillation toolkit for fermionic quasifree states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a covariance file against all invariants")
    p.add_argument("state")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("protocol", help="run the canonical protocol on a state file")
    p.add_argument("state")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--sample-suboptimal", type=int, default=0, metavar="T")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out")
    p.set_defaults(func=_cmd_protocol)

    p = sub.add_parser("scan-m", help="compare protocol sizes m = 2..m_max")
    p.add_argument("state")
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_scan_m)

    p = sub.add_parser("oracle", help="brute-force verification on a small state file")
    p.add_argument("state")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("closed-form", help="exact two/four-mode formulas")
    fam = p.add_subparsers(dest="family", required=True)
    q = fam.add_parser("two-mode")
    q.add_argument("--params", type=float, nargs=4, required=True, metavar=("A", "B", "C", "D"))
    q.add_argument("--emit", help="write the covariance file")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_closed_form)
    q = fam.add_parser("four-mode")
    q.add_argument(
        "--params", type=float, nargs=5, required=True, metavar=("NU1", "NU2", "NU3", "NU4", "SIGMA")
    )
    q.add_argument("--emit", help="write the covariance file")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_closed_form)
    q = fam.add_parser("fg-scan")
    q.add_argument("--x", type=float, nargs=3, default=(-0.9, 0.9, 10), metavar=("LO", "HI", "NUM"))
    q.add_argument("--y", type=float, nargs=3, default=(-0.9, 0.9, 10), metavar=("LO", "HI", "NUM"))
    q.add_argument("--sigma", type=float, default=0.2)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_closed_form)

    p = sub.add_parser("lattice", help="hopping-chain ground state pipeline")
    act = p.add_subparsers(dest="action", required=True)
    q = act.add_parser("sweep")
    q.add_argument("--L", type=_parse_range, required=True)
    q.add_argument("--N", type=_parse_range, required=True)
    q.add_argument("--m", type=int, default=2)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--seed", type=int, default=_default_seed())
    q.add_argument("--out")
    q.set_defaults(func=_cmd_lattice)
    q = act.add_parser("fit")
    q.add_argument("--data", required=True, help="sweep CSV file")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--L-min", type=float, default=20000.0)
    q.add_argument("--value", choices=("f", "p"), default="f")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_lattice)
    q = act.add_parser("minlen")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--L-lo", type=int, default=2)
    q.add_argument("--L-hi", type=int, default=100000)
    q.add_argument("--m", type=int, default=2)
    q.add_argument("--seed", type=int, default=_default_seed())
    q.add_argument("--out")
    q.set_defaults(func=_cmd_lattice)

    p = sub.add_parser("bench", help="matvec and solver timings")
    p.add_argument("--L", type=int, default=1 << 17)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--repeat", type=int, default=9)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, lattice.ConvergenceError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
