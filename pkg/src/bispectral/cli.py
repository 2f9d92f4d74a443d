"""Command-line front end.

    bispectral construct --n 3 --out D3.json
    bispectral verify --n 2
    bispectral simulate --n 3 --preset spread --t 5 --out traj.csv
    bispectral eval --n 2 --fn psi_tilde --x 0.3 -0.7 --z 0.1 0.9
    bispectral airy --t 1.5

Exit codes: 0 success, 2 empty solution space, 3 resource cap, 4 missing
artifact, 5 dynamics abort, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_RESOURCE = 3
EXIT_MISSING = 4
EXIT_DYNAMICS = 5
EXIT_USAGE = 64

log = logging.getLogger("bispectral")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad input; that code is taken, so use 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj, out=None):
    text = json.dumps(_finite(obj), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _finite(obj):
    """Replace NaN/inf (not valid JSON) by None, recursively."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_construct(args) -> int:
    from .intertwiner import AnsatzSpec, ResourceError, default_spec
    from .store import EmptySolutionSpace, cache_path, construct_dn, save_construction

    if args.n < 2:
        raise UsageError("construct needs --n >= 2 (there are no pair terms for n=1)")
    start = default_spec(args.n)
    if args.bounds:
        start = AnsatzSpec(args.n, *args.bounds)
    try:
        c = construct_dn(args.n, start=start, cap=args.cap)
    except ResourceError as exc:
        _dump({"status": "resource cap", "message": str(exc), "dimension": exc.dimension, "cap": args.cap})
        return EXIT_RESOURCE
    except EmptySolutionSpace as exc:
        _dump({"status": "empty solution space", "message": str(exc), "certificate": exc.certificate})
        return EXIT_EMPTY
    out = Path(args.out or f"D{args.n}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(c.op.to_json(), indent=1) + "\n")
    cert = dict(c.certificate)
    cert.pop("seconds", None)
    cert["operator_file"] = out.name
    cert_path = out.with_suffix(".cert.json")
    cert_path.write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
    if start == default_spec(args.n):
        try:
            save_construction(c, cache_path(args.n))
        except OSError as exc:
            log.warning("cache not written: %s", exc)
    _dump({"status": "ok", "operator": str(out), "certificate": str(cert_path), "verified": cert["verified"]})
    return EXIT_OK if cert["verified"] else EXIT_EMPTY


def cmd_verify(args) -> int:
    from .intertwiner import ResourceError
    from .store import EmptySolutionSpace, MissingArtifactError, get_dn
    from .suite import run_suite

    ns = [args.n] if args.n is not None else [1, 2, 3]
    for n in ns:
        if not 1 <= n <= 4:
            raise UsageError("verify supports n in 1..4")

    def operator(n):
        return get_dn(n, require_cached=args.use_cached)

    reports = []
    try:
        for n in ns:
            reports.append(run_suite(n, seed=args.seed, numeric_points=args.points, get_operator=operator))
    except MissingArtifactError as exc:
        _dump({"status": "missing artifact", "message": str(exc)})
        return EXIT_MISSING
    except ResourceError as exc:
        _dump({"status": "resource cap", "message": str(exc), "dimension": exc.dimension})
        return EXIT_RESOURCE
    except EmptySolutionSpace as exc:
        _dump({"status": "empty solution space", "message": str(exc), "certificate": exc.certificate})
        return EXIT_EMPTY
    ok = all(r.passed for r in reports)
    _dump({"overall": "pass" if ok else "fail", "seed": args.seed, "reports": [r.to_json() for r in reports]}, args.out)
    return EXIT_OK if ok else 1


def cmd_simulate(args) -> int:
    from .dynamics import CollisionError, StepSizeError, integrate, load_initial_state, preset

    if args.init:
        s0 = load_initial_state(args.init)
        if s0.n != args.n:
            raise UsageError(f"initial state has {s0.n} particles, --n is {args.n}")
    else:
        name = args.preset or ("free" if args.n == 1 else "spread")
        try:
            s0 = preset(args.n, name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0]))
    out = args.out or f"trajectory_n{args.n}.csv"
    try:
        traj = integrate(s0, args.t, rtol=args.dt_tol)
    except (CollisionError, StepSizeError) as exc:
        traj = exc.trajectory
        traj.to_csv(out)
        summary = {"status": "aborted", "message": str(exc), "csv": out, "seed": args.seed}
        if isinstance(exc, CollisionError):
            summary["collision_time"] = exc.t
        if traj.samples:
            summary["diagnostics"] = traj.diagnostics()
        _dump(summary)
        return EXIT_DYNAMICS
    traj.to_csv(out)
    _dump({"status": "ok", "csv": out, "seed": args.seed, "diagnostics": traj.diagnostics()})
    return EXIT_OK


def cmd_eval(args) -> int:
    from .algebra import PoleError
    from .numerics import eval_function
    from .store import MissingArtifactError, get_dn

    if len(args.x) != args.n or len(args.z) != args.n:
        raise UsageError(f"--x and --z need {args.n} values each")
    D = None
    if args.fn.endswith("tilde"):
        if args.n < 2:
            raise UsageError("tilde functions need n >= 2")
        try:
            D = get_dn(args.n, require_cached=args.use_cached)
        except MissingArtifactError as exc:
            _dump({"status": "missing artifact", "message": str(exc)})
            return EXIT_MISSING
    try:
        v = eval_function(args.fn, args.n, args.x, args.z, D)
    except PoleError as exc:
        raise UsageError(f"pole: {exc}")
    _dump({"fn": args.fn, "n": args.n, "x": args.x, "z": args.z, "value": v})
    return EXIT_OK


def cmd_airy(args) -> int:
    from .numerics import DomainError, airy_ai

    try:
        a = airy_ai(args.t)
    except DomainError as exc:
        raise UsageError(str(exc))
    _dump({"t": a.t, "ai": a.ai, "ai_prime": a.ai_prime, "method": a.method})
    return EXIT_OK


# ----------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------
def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bispectral", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--n", type=_positive_int, default=None)
        sp.add_argument("--config", help="JSON file with default values for these flags")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
        sp.add_argument("--use-cached", action="store_true", help="fail with exit 4 instead of constructing D_n")

    sp = sub.add_parser("construct", help="solve for D_n and write it with a certificate")
    common(sp)
    sp.add_argument("--bounds", type=int, nargs=3, metavar=("ORDER", "DEGREE", "DEN_EXP"))
    sp.add_argument("--cap", type=_positive_int, default=20000)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="run the exact verification suite")
    common(sp)
    sp.add_argument("--points", type=int, default=10, help="random points for finite-difference checks")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="integrate the particle system and write a CSV")
    common(sp)
    sp.add_argument("--t", type=_positive_float, default=5.0)
    sp.add_argument("--dt-tol", type=_positive_float, default=1e-10, help="relative step tolerance")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--preset")
    src.add_argument("--init", help="JSON file {\"x\": [...], \"y\": [...]}")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("eval", help="evaluate psi, sigma, psi_tilde or sigma_tilde at a point")
    common(sp)
    sp.add_argument("--fn", choices=["psi", "sigma", "psi_tilde", "sigma_tilde"], default="psi")
    sp.add_argument("--x", type=float, nargs="+", required=False, default=None)
    sp.add_argument("--z", type=float, nargs="+", required=False, default=None)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("airy", help="Ai and Ai' at one argument")
    sp.add_argument("--t", type=float, required=False, default=None)
    sp.add_argument("--config")
    sp.set_defaults(func=cmd_airy)
    return p


def _apply_config(parser, argv):
    """Parse twice: the config file supplies defaults, explicit flags win."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _validate(args):
    cmd = args.command
    if cmd in ("construct", "simulate", "eval") and args.n is None:
        raise UsageError(f"{cmd} needs --n")
    if getattr(args, "n", None) is not None and (not isinstance(args.n, int) or args.n < 1):
        raise UsageError("n must be a positive integer")
    if cmd == "simulate":
        for name in ("t", "dt_tol"):
            v = getattr(args, name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise UsageError(f"--{name.replace('_', '-')} must be > 0")
    if cmd == "eval" and (args.x is None or args.z is None):
        raise UsageError("eval needs --x and --z")
    if cmd == "airy":
        if args.t is None:
            raise UsageError("airy needs --t")
        args.t = float(args.t)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:  # argparse reports bad flags by exiting
            return exc.code if isinstance(exc.code, int) else EXIT_USAGE
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"bispectral: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
