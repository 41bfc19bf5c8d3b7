"""Command-line interface: ``strausslab <command> [options]``.

Exit codes: 0 success, 1 a numerical verdict failed, 2 configuration or
domain error (raised before any heavy computation).  Every JSON report
embeds the configuration that produced it under ``"config"``; passing that
file back with ``--config`` reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exceptions import StraussLabError
from .exponents import (admissible_range, as_rational, critical_powers, exponent_profile,
                        to_json, verify_lemma_chain)

REPORT_SCHEMA = "strausslab.report/1"
THREADS_ENV = "STRAUSSLAB_THREADS"


class UsageError(Exception):
    """Invalid command-line configuration (exit code 2)."""


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _thread_limit(n):
    # output never depends on the thread count; this only caps BLAS pools
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return nullcontext()
    return threadpool_limits(limits=int(n))


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _config_of(args) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in ("func", "config", "threads"):
            continue
        if isinstance(val, Fraction):
            val = str(val)
        elif isinstance(val, Path):
            val = str(val)
        out[key] = val
    return out


def _emit(doc: dict, args, stream=None) -> str:
    doc = dict(doc)
    doc["schema"] = REPORT_SCHEMA
    doc["config"] = _config_of(args)
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    out = getattr(args, "out", None)
    if out and args.command != "simulate":
        Path(out).write_text(text)
    (stream or sys.stdout).write(text)
    return text


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(type(obj))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_exponents(args) -> int:
    n = args.n
    doc = {"command": "exponents", "n": n, "critical_powers": to_json(critical_powers(n)),
           "range": to_json(admissible_range(n)) if n >= 4 else None}
    ok = True
    if args.p is not None:
        prof = exponent_profile(n, args.p)
        verdicts = verify_lemma_chain(n, args.p)
        doc["profile"] = to_json(prof)
        doc["verdicts"] = to_json(verdicts)
        ok = all(v.holds for v in verdicts)
    doc["passed"] = ok
    _emit(doc, args)
    return 0 if ok else 1


def cmd_range(args) -> int:
    _emit({"command": "range", "range": to_json(admissible_range(args.n))}, args)
    return 0


def cmd_verify(args) -> int:
    from .suites import run_suite
    kw = {}
    if args.suite in ("strichartz", "chainrule"):
        kw = {"n": args.n, "p": str(args.p)}
    if args.suite == "strichartz":
        from .fixtures import load_fixtures
        fx = load_fixtures()
        kw["surrogate"] = args.surrogate
        kw["fixtures"] = {"C": fx["C"], "C1": fx["C1"],
                          "C_key": fx["entries"]["C_key"]["value"],
                          "C_chain": fx["entries"]["C_chain"]["value"]}
    doc = run_suite(args.suite, args.seed, **kw)
    doc["command"] = "verify"
    _emit(doc, args)
    return 0 if doc["passed"] else 1


def _radial_profiles(n, shape: str):
    """Closed-form radial data (f, g) as callables of r."""
    def f(r):
        return np.exp(-np.asarray(r) ** 2)

    def g(r):
        r = np.asarray(r)
        if shape == "gaussian-f":
            return np.zeros_like(r)
        return 0.3 * (n - r ** 2) * np.exp(-r ** 2 / 2)
    return f, g


def cmd_simulate(args) -> int:
    from .fieldio import norm_rows, save_snapshot, write_norm_csv
    from .fixtures import PROFILE, constants
    from .littlewood_paley import RadialProfile
    from .picard import NonlinearitySpec, normalize_data, picard_iterate, thresholds
    from .propagator import CauchyData, time_grid
    from .radial_fd import radial_reference_solve
    from .suites import radial_grid

    prof = exponent_profile(args.n, args.p)
    times = time_grid(args.T, args.steps)
    grid = radial_grid(args.n)
    fr, gr = _radial_profiles(args.n, args.data)
    f, g = RadialProfile(grid, fr(grid.r)), RadialProfile(grid, gr(grid.r))
    C = C1 = None
    if (args.n, as_rational(PROFILE[1])) == (PROFILE[0], prof.p):
        C, C1 = constants()
    if args.eps == "auto":
        if C is None:
            raise UsageError(f"no measured constants for n={args.n}, p={prof.p}; pass --eps")
        eps = 0.5 * min(thresholds(C, C1, float(prof.p)))
    else:
        eps = float(args.eps)
    data = normalize_data(CauchyData(f, g, 1.0), prof, times).scaled(eps)
    doc = {"command": "simulate", "backend": args.backend, "eps": eps}
    if args.backend == "spectral":
        u, rep = picard_iterate(data, NonlinearitySpec.power(prof.p), prof, times,
                                max_iters=args.max_iters, C=C, C1=C1)
        doc["report"] = rep.to_dict()
        ok = rep.verdict == "converged" and rep.weak_residual <= 1e-4
        if args.out:
            out = Path(args.out)
            save_snapshot(u, out / "snapshot")
            write_norm_csv(out / "norms.csv", norm_rows(u, prof))
    else:
        # same normalisation as the spectral run: ||S(t)(f, g)||_X = 1
        scale = float(data.f.values[0] / f.values[0])
        res = radial_reference_solve(fr, gr, args.n, float(prof.p), args.T, eps=eps * scale, dr=args.dr,
                                     R=args.T + 12.0, n_out=min(args.steps, 256))
        doc["report"] = {"blowup_time": res.blowup_time, "lifespan": res.lifespan,
                         "sup_final": float(np.max(np.abs(res.values[-1]))), "meta": res.meta,
                         "data_scale": scale}
        ok = res.blowup_time is None
    doc["passed"] = bool(ok)
    text = _emit(doc, args)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "report.json").write_text(text)
    return 0 if ok else 1


def _p_grid(args):
    if args.p_values:
        return [float(x) for x in args.p_values]
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.steps == 1:
        return [float(args.p_min)]
    return [round(float(x), 12) for x in np.linspace(float(args.p_min), float(args.p_max), args.steps)]


def cmd_scan(args) -> int:
    from .radial_fd import blowup_scan, transition_amplitudes, write_scan_csv, write_scan_dat
    width = args.width
    ps = _p_grid(args)
    if min(ps) <= 1:
        raise UsageError("every p must exceed 1")

    def f(r):
        return np.exp(-(r / width) ** 2)

    def g(r):
        return np.zeros_like(r)
    R = args.T_max + 4.0 * width + 6.0
    rows = blowup_scan(args.n, f, g, ps, args.eps, T_max=args.T_max, dr=args.dr, cfl=args.cfl, R=R)
    text = write_scan_csv(rows)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        out.with_suffix(".dat").write_text(write_scan_dat(rows))
        trans = {repr(k): v for k, v in transition_amplitudes(rows).items()}
        doc = {"schema": REPORT_SCHEMA, "config": _config_of(args), "transition": trans,
               "p_c": to_json(critical_powers(args.n))["p_c"]}
        out.with_suffix(".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_besov_norm(args) -> int:
    from .corpus import field_from_member, periodic_corpus, radial_corpus
    from .grids import PeriodicGrid, RadialGrid
    from .littlewood_paley import NormSpec, besov_norm
    if args.radial:
        grid = RadialGrid(args.dim, R=args.L, rho_max=16.0, panels=20)
        corpus = radial_corpus(args.dim, args.seed)
    else:
        if args.dim > 3:
            raise UsageError("full grids are limited to d <= 3; use --radial")
        grid = PeriodicGrid(args.dim, args.N, args.L)
        corpus = periodic_corpus(args.dim, args.seed)
    if not 0 <= args.member < len(corpus):
        raise UsageError(f"--member must be in [0, {len(corpus) - 1}]")
    member = corpus[args.member]
    u = field_from_member(grid, member, args.scale)
    u = u.with_values(grid.remove_mean(u.values))
    p_int = math.inf if args.p_int == "inf" else float(_rational(args.p_int))
    fine = math.inf if args.fine == "inf" else float(args.fine)
    value = besov_norm(u, NormSpec(p_int, float(args.s), fine))
    _emit({"command": "besov-norm", "member": member.name, "norm": value}, args)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--out", default=None, help="output path")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=_threads_default(),
                        help=f"BLAS threads (default from ${THREADS_ENV} or 1)")
    common.add_argument("--config", default=None,
                        help="JSON config (e.g. an emitted report) supplying defaults")

    ap = argparse.ArgumentParser(prog="strausslab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", parents=[common], help="exact exponents and verdicts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=_rational, default=None, help='power, e.g. "9/5"')
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("range", parents=[common], help="admissible p-range for dimension n")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("verify", parents=[common], help="run an invariant suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--p", type=_rational, default=Fraction(9, 5))
    p.add_argument("--surrogate", action="store_true", help="strichartz: add the d=3 grid runs")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="Picard iteration or FD reference run")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--p", type=_rational, default=Fraction(9, 5))
    p.add_argument("--eps", default="auto", help='amplitude or "auto" (half the fixture threshold)')
    p.add_argument("--T", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=512, help="time steps")
    p.add_argument("--max-iters", type=int, default=25)
    p.add_argument("--backend", choices=("spectral", "radial-fd"), default="spectral")
    p.add_argument("--dr", type=float, default=0.05, help="radial-fd cell size")
    p.add_argument("--data", choices=("gaussian", "gaussian-f"), default="gaussian")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", parents=[common], help="blow-up / global lifespan table")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--p-min", type=_rational, default=Fraction(7, 5))
    p.add_argument("--p-max", type=_rational, default=Fraction(3))
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--p-values", nargs="*", default=None)
    p.add_argument("--eps", type=float, nargs="+", default=[4, 2, 1, 0.5, 0.25, 0.125])
    p.add_argument("--T-max", type=float, default=20.0)
    p.add_argument("--dr", type=float, default=0.05)
    p.add_argument("--cfl", type=float, default=0.25)
    p.add_argument("--width", type=float, default=3.0, help="data f = exp(-(r/width)^2)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("besov-norm", parents=[common], help="Besov norm of a corpus member")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--radial", action="store_true")
    p.add_argument("--N", type=int, default=256)
    p.add_argument("--L", type=float, default=24.0)
    p.add_argument("--member", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--p-int", default="2")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--fine", default="2")
    p.set_defaults(func=cmd_besov_norm)
    return ap


def _apply_config(parser, argv):
    """Parse ``argv`` with defaults taken from a --config JSON file.

    The file may be a bare mapping or any emitted report (its ``"config"``
    entry is used).  Options given on the command line still win, and the
    command name may be omitted when the file records it."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        doc = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read --config {known.config}: {exc}")
    cfg = doc.get("config", doc)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if command is None:
        command = cfg.get("command")
        if command not in choices:
            parser.error("--config file does not name a command; pass one explicitly")
        argv = [command] + argv
    for action in choices[command]._actions:
        if action.dest in cfg and action.dest not in ("command", "config", "help"):
            action.default = cfg[action.dest]
            action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = _apply_config(parser, argv)
    if args.command == "verify" and args.suite not in ("besov", "strichartz", "chainrule", "propagator"):
        print(f"error: unknown suite {args.suite!r}; choose from besov, strichartz, chainrule, "
              f"propagator", file=sys.stderr)
        return 2
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except (StraussLabError, UsageError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
