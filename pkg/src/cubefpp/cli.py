"""Command line entry point: ``cubefpp <subcommand> [flags]``.

Exit codes: 0 success, 1 invariant or acceptance failure, 2 usage or config
error, 3 resource cap exceeded.
"""

import argparse
import json
import math
import sys

from . import __version__, analytic, calibration, verify
from .btp import DEFAULT_MAX_PARTICLES, PopulationCapExceeded
from .experiments import (COMPARE_FIELDS, ExperimentConfig, render, run_btp, run_fpp, run_walks,
                          write_summary)
from .hypercube import DimensionError
from .stats import SUMMARY_FIELDS

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive_time(text):
    x = float(text)
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError("time must be positive and finite")
    return x


def _common(p, n_list=False):
    p.add_argument("--n", type=_int_list if n_list else int, default=None,
                   help="dimension" + (" list, comma separated" if n_list else ""))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output base path; _trials/_summary/_compare files are written")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file; explicit flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubefpp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed forms and reduced quadratures at (n, u)")
    _common(p)
    p.add_argument("--u", type=_positive_time, default=None, help="time (default theta)")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("fpp", help="first-passage trials")
    _common(p)
    p.add_argument("--covering", action="store_true", default=None)
    p.add_argument("--p", type=_int_list, default=None, help="norm orders, e.g. 1,2")

    p = sub.add_parser("btp", help="branching process trials; expected population is e^(n*horizon)")
    _common(p)
    p.add_argument("--horizon", "--u", dest="u", type=_positive_time, default=None)
    p.add_argument("--max-particles", type=int, default=None,
                   help=f"per-run particle cap (default {DEFAULT_MAX_PARTICLES})")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("walk", help="endpoint-conditioned random walks")
    _common(p)
    p.add_argument("--u", "--horizon", dest="u", type=_positive_time, default=None)

    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.add_argument("--inject-negative", action="store_true", default=None,
                   help="test mode: corrupt one weight; the suite must then fail")
    p.add_argument("--quick", action="store_true")

    p = sub.add_parser("pilot", help="measure and freeze calibration bands")
    _common(p, n_list=True)
    p.add_argument("--p", type=_int_list, default=None)
    return ap


_FIELDS = ("n", "trials", "seed", "out", "format", "threads", "u", "tol", "covering",
           "max_particles", "p", "inject_negative")


def make_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if base.get("command", args.command) != args.command:
            raise UsageError(f"config is for {base['command']!r}, not {args.command!r}")
    base["command"] = args.command
    for k in _FIELDS:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    if args.command == "pilot":
        ns = base.pop("n", None)
        if isinstance(ns, (list, tuple)):
            base["pilot_ns"] = tuple(ns)
        elif ns is not None:
            base["pilot_ns"] = (ns,)
        base.setdefault("seed", calibration.PILOT_SEED)
        base.setdefault("trials", calibration.DEFAULT_TRIALS)
    try:
        return ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def cmd_analytic(cfg: ExperimentConfig) -> int:
    n, u = cfg.n, cfg.time
    if cfg.u is not None and cfg.u != analytic.THETA:
        _warn("u differs from theta; oracle-validated range only")
    acfg = analytic.AnalyticConfig(tol=cfg.tol)
    rows = []
    c = analytic.constants()
    for k in ("theta", "a_limit", "b_limit", "ab_limit", "p_lower_limit", "geodesic_slope"):
        rows.append({"metric": k, "value": getattr(c, k), "est_error": 0.0})
    rows.append({"metric": "log_m_one", "value": float(analytic.log_occupancy_mean(n, u, n)), "est_error": 0.0})
    for name, fn in (("a_expected", analytic.a_expected), ("b_expected", analytic.b_expected),
                     ("ab_expected", analytic.ab_expected)):
        v = fn(n, u, acfg)
        rows.append({"metric": name, "value": v.value, "est_error": v.est_error})
    lo, hi = analytic.s_bounds(n, u, acfg)
    rows.append({"metric": "s_lower", "value": lo, "est_error": math.nan})
    rows.append({"metric": "s_upper", "value": hi, "est_error": 0.0})
    try:
        v = analytic.success_lower_bound(n, u, acfg)
        rows.append({"metric": "success_lower_bound", "value": v.value, "est_error": v.est_error})
    except analytic.DegenerateBoundError as exc:
        _warn(str(exc))
    rows.append({"metric": "oriented_mass_ratio", "value": analytic.oriented_mass_ratio(n, u),
                 "est_error": 0.0})
    text = render(rows, ("metric", "value", "est_error"), cfg, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _emit(summary, cfg):
    if cfg.out:
        for kind, path in write_summary(summary).items():
            print(f"wrote {kind}: {path}", file=sys.stderr)
    sys.stdout.write(render([m.row() for m in summary.metrics], SUMMARY_FIELDS, cfg, cfg.format))
    if summary.comparisons:
        sys.stdout.write(render([c.row() for c in summary.comparisons], COMPARE_FIELDS, cfg, cfg.format))


def cmd_fpp(cfg):
    _emit(run_fpp(cfg), cfg)
    return EXIT_OK


def cmd_btp(cfg):
    if cfg.u is not None and cfg.u != analytic.THETA:
        _warn("horizon differs from theta; analytic comparisons are in the oracle-validated range only")
    s = run_btp(cfg)
    _emit(s, cfg)
    return EXIT_OK if s.metric("violations").max == 0 else EXIT_FAIL


def cmd_walk(cfg):
    s = run_walks(cfg)
    _emit(s, cfg)
    return EXIT_OK if s.metric("endpoint_ok").min == 1 else EXIT_FAIL


def cmd_verify(cfg, quick=False):
    checks = verify.run_all(inject_negative=cfg.inject_negative, seed=cfg.seed, quick=quick)
    for c in checks:
        print(c.line())
    bad = sum(not c.ok for c in checks)
    print(f"{len(checks) - bad}/{len(checks)} checks passed")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def cmd_pilot(cfg):
    doc = calibration.run_pilot(cfg.pilot_ns, cfg.trials, cfg.seed, cfg.out, cfg.threads,
                                log=lambda m: print(m, file=sys.stderr))
    print(json.dumps(doc["bands"], indent=1))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, args.quick)
        handler = {"analytic": cmd_analytic, "fpp": cmd_fpp, "btp": cmd_btp,
                   "walk": cmd_walk, "pilot": cmd_pilot}[args.command]
        return handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PopulationCapExceeded, MemoryError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except analytic.QuadratureError as exc:
        print(f"quadrature failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
