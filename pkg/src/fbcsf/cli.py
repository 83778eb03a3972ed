"""Command-line front end.

Exit codes: 0 success, 1 a scientific check failed, 2 usage or validation
error. Every numeric argument is validated before any computation starts.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ancient, diagnostics, exact_forms, flow, io, rotator, spectral
from .curve import diameter
from .svg import emit_svg

log = logging.getLogger("fbcsf")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Command path plus its parameters; round-trips through JSON."""

    command: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        d = json.loads(text)
        return cls(command=list(d["command"]), params=dict(d["params"]))


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


def _check_rho(rho: float) -> None:
    _require(0.0 < rho <= math.pi / 4, f"--rho must lie in (0, pi/4], got {rho}")


def _check_nodes(n: int) -> None:
    _require(n >= 64 and n % 2 == 0, f"--nodes must be even and >= 64, got {n}")


def _flow_config(args) -> flow.FlowConfig:
    _require(0.0 < args.cfl <= 0.5, f"--cfl must lie in (0, 0.5], got {args.cfl}")
    _require(args.boundary_order in (1, 2), "--boundary-order must be 1 or 2")
    _require(0.0 < args.stop_theta < math.pi / 2, "--stop-theta must lie in (0, pi/2)")
    _require(args.stop_length > 0.0, "--stop-length must be positive")
    _require(args.max_steps >= 1, "--max-steps must be positive")
    _require(args.frame_dt > 0.0, "--frame-dt must be positive")
    return flow.FlowConfig(
        n_nodes=args.nodes,
        cfl=args.cfl,
        stop_theta_bar=args.stop_theta,
        stop_length=args.stop_length,
        max_steps=args.max_steps,
        boundary_order=args.boundary_order,
        frame_dt=args.frame_dt,
    )


def _out(args, default: str) -> Path:
    return Path(args.out if args.out else default)


# -- exact -------------------------------------------------------------------

def cmd_exact(args) -> int:
    what = args.what
    if what == "lambda0":
        value = exact_forms.solve_lambda0()
        _say(args, f"{value:.12f}")
        payload = {"lambda0": value}
    elif what == "constants":
        c = exact_forms.critical_constants()
        payload = {"lambda0": c.lambda0, "mu_neg": c.mu_neg}
        _say(args, json.dumps(payload))
    else:
        _require(args.theta is not None, f"exact {what} needs --theta")
        th = args.theta
        _require(0.0 < th < math.pi / 2, f"--theta must lie in (0, pi/2), got {th}")
        if what == "lambda-theta":
            payload = {"theta": th, "lambda": exact_forms.solve_lambda_theta(th)}
        else:
            p = exact_forms.oval_params_for(th)
            payload = {"rho": th, "lambda": p.lam, "t_rho": p.t}
        _say(args, json.dumps(payload))
    if args.out:
        io.dump_json(payload, args.out)
    return EXIT_OK


# -- flow / ancient ---------------------------------------------------------

def cmd_flow_run(args) -> int:
    cfg = _flow_config(args)
    if args.initial == "diameter":
        _require(args.max_steps < 10**7, "diameter runs need an explicit --max-steps")
        traj = flow.run(diameter(args.nodes), 0.0, cfg)
        extra = {"initial": "diameter"}
    else:
        _check_rho(args.rho)
        _check_nodes(args.nodes)
        p = exact_forms.oval_params_for(args.rho)
        traj = flow.run(ancient.initial_curve(args.rho, args.nodes), p.t, cfg)
        extra = {"initial": "oval", "rho": args.rho, "lambda_rho": p.lam, "t_rho": p.t}
    out = io.write_trajectory(traj, _out(args, "traj"), extra)
    _say(args, f"{len(traj)} frames, stop={traj.stop_reason}, extinction={traj.extinction_estimate!r} -> {out}")
    return EXIT_OK


def cmd_ancient_construct(args) -> int:
    _check_rho(args.rho)
    _check_nodes(args.nodes)
    cfg = _flow_config(args)
    app = ancient.construct(args.rho, cfg)
    extra = {"initial": "oval", "rho": app.rho, "lambda_rho": app.lambda_rho, "t_rho": app.t_rho}
    out = io.write_trajectory(app.traj, _out(args, "ancient"), extra)
    _say(args, f"rho={app.rho} t0={app.t0!r} frames={len(app.traj)} -> {out}")
    return EXIT_OK


def _parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse list {text!r}") from exc


def cmd_ancient_family(args) -> int:
    rhos = _parse_list(args.rhos)
    _require(len(rhos) >= 1, "--rhos must not be empty")
    for r in rhos:
        _check_rho(r)
    _check_nodes(args.nodes)
    _require(args.compare_at < 0.0, "--compare-at must be negative")
    _require(args.jobs >= 1, "--jobs must be positive")
    cfg = _flow_config(args)
    apps = ancient.construct_many(rhos, cfg, jobs=args.jobs)
    starts = [a.t0 for a in apps]
    payload = {"rhos": rhos, "compare_at": args.compare_at, "start_times": starts}
    try:
        dists = ancient.family_distances(apps, args.compare_at)
        decreasing = all(b < a for a, b in zip(dists, dists[1:]))
        payload.update(covered=True, distances=dists, strictly_decreasing=decreasing)
        code = EXIT_OK if decreasing else EXIT_CHECK_FAILED
    except ValueError as exc:
        payload.update(covered=False, distances=None, strictly_decreasing=False, error=str(exc))
        code = EXIT_CHECK_FAILED
    io.dump_json(payload, _out(args, "family.json"))
    _say(args, json.dumps(payload))
    return code


def _approximation_from_dir(directory) -> ancient.AncientApproximation:
    meta = io.read_meta(directory)
    traj = io.read_trajectory(directory)
    if "rho" not in meta:
        raise UsageError(f"{directory} was not produced from oval initial data")
    if math.isfinite(traj.extinction_estimate) and traj.extinction_estimate != 0.0:
        traj = traj.normalized()
    return ancient.AncientApproximation(
        rho=meta["rho"], lambda_rho=meta["lambda_rho"], t_rho=meta["t_rho"], traj=traj
    )


def cmd_ancient_fit(args) -> int:
    app = _approximation_from_dir(args.traj)
    fit = ancient.fit_A(app)
    payload = {
        "A": fit.A,
        "window": list(fit.window),
        "profile_residual": fit.profile_residual,
        "resolution": fit.resolution,
        "decay_exponent": ancient.fit_decay_exponent(app),
        "predicted_exponent": spectral.decay_rate_prediction(),
    }
    io.dump_json(payload, _out(args, "fit.json"))
    _say(args, json.dumps(payload))
    return EXIT_OK


# -- diag --------------------------------------------------------------------

def cmd_diag_check(args) -> int:
    traj = io.read_trajectory(args.traj)
    # the inequalities are stated with extinction at t = 0
    if math.isfinite(traj.extinction_estimate) and traj.extinction_estimate != 0.0:
        traj = traj.normalized()
    names = None if args.all or not args.name else args.name
    if names:
        for n in names:
            _require(n in diagnostics.INEQUALITY_CHECKS, f"unknown check {n!r}")
    reports = diagnostics.run_checks(traj, names)
    io.dump_json([r.to_dict() for r in reports], _out(args, "report.json"))
    for r in reports:
        _say(args, f"{r.status:15s} {r.name:20s} worst={r.worst_violation:.3e} at t={r.worst_time:.6g} tol={r.tolerance:g}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


# -- spectral ----------------------------------------------------------------

def cmd_spectral_eig(args) -> int:
    _require(args.n >= 16, f"--n must be at least 16, got {args.n}")
    _require(args.modes >= 0, "--modes must be nonnegative")
    p = spectral.RobinEigenProblem(args.n)
    res = spectral.even_restriction(p) if args.even else spectral.solve(p)
    k = min(args.modes, len(res.eigenvalues))
    payload = {
        "n": args.n,
        "even": bool(args.even),
        "h": p.h,
        "eigenvalues": res.eigenvalues.tolist(),
        "negative_count": spectral.count_negative(res),
        "x": res.x.tolist(),
        "modes": res.modes[:k].tolist(),
    }
    io.dump_json(payload, _out(args, "spec.json"))
    _say(args, f"lowest eigenvalues: {res.eigenvalues[:4].tolist()}")
    return EXIT_OK


# -- rotator -----------------------------------------------------------------

def cmd_rotator_scan(args) -> int:
    _require(args.b_min > 0.0, f"--b-min must be positive, got {args.b_min}")
    _require(args.b_max >= args.b_min, "--b-max must be at least --b-min")
    _require(args.count >= 1, "--count must be positive")
    _require(args.s_max > 0.0, "--s-max must be positive")
    _require(0.0 < args.ds <= 1e-3 * max(1.0, 1.0 / args.b_max), "--ds must satisfy 0 < ds <= 1e-3*max(1, 1/B)")
    grid = np.linspace(args.b_min, args.b_max, args.count)
    rows = rotator.boundary_return_scan(grid, args.s_max, args.ds)
    io.dump_json(
        [{"B": r.B, "min_defect": r.min_defect, "y_final": r.y_final, "s_exit": r.s_exit} for r in rows],
        _out(args, "rotator.json"),
    )
    bad = [r for r in rows if not (r.min_defect >= 0.5 * r.B and r.y_increase <= 1e-12)]
    _say(args, f"{len(rows)} values of B, global min defect/B = {min(r.min_defect / r.B for r in rows):.6g}")
    return EXIT_CHECK_FAILED if bad else EXIT_OK


# -- plot --------------------------------------------------------------------

def _parse_barrier(text: str) -> float:
    key, _, val = text.partition("=")
    if key.strip() != "theta" or not val:
        raise UsageError(f"--barrier expects theta=VALUE, got {text!r}")
    th = float(val)
    _require(0.0 < th < math.pi / 2, f"barrier angle must lie in (0, pi/2), got {th}")
    return th


def cmd_plot(args) -> int:
    _require(args.every >= 1, "--every must be at least 1")
    barriers = [_parse_barrier(b) for b in args.barrier or ()]
    traj = io.read_trajectory(args.traj)
    out = emit_svg(traj, args.every, _out(args, "figure.svg"), barriers)
    _say(args, str(out))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (family runs)")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    p.add_argument("--config", help="JSON file of parameters overriding the flags")
    return p


def _flow_args(p: argparse.ArgumentParser, nodes: int = 512) -> None:
    d = flow.FlowConfig()
    p.add_argument("--nodes", type=int, default=nodes, help="number of segments")
    p.add_argument("--cfl", type=float, default=d.cfl)
    p.add_argument("--boundary-order", type=int, default=d.boundary_order)
    p.add_argument("--stop-theta", type=float, default=d.stop_theta_bar)
    p.add_argument("--stop-length", type=float, default=d.stop_length)
    p.add_argument("--max-steps", type=int, default=d.max_steps)
    p.add_argument("--frame-dt", type=float, default=d.frame_dt)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fbcsf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    p = sub.add_parser("exact", parents=[common], help="closed-form constants")
    p.add_argument("what", choices=["lambda0", "constants", "lambda-theta", "t-rho"])
    p.add_argument("--theta", type=float, help="angle for lambda-theta / t-rho")
    p.set_defaults(func=cmd_exact)

    g = sub.add_parser("flow", help="run the flow").add_subparsers(dest="action", required=True)
    p = g.add_parser("run", parents=[common], help="integrate from oval or diameter data")
    p.add_argument("--initial", choices=["oval", "diameter"], default="oval")
    p.add_argument("--rho", type=float, default=0.2)
    _flow_args(p)
    p.set_defaults(func=cmd_flow_run)

    g = sub.add_parser("ancient", help="ancient-solution approximations").add_subparsers(dest="action", required=True)
    p = g.add_parser("construct", parents=[common])
    p.add_argument("--rho", type=float, required=True)
    _flow_args(p)
    p.set_defaults(func=cmd_ancient_construct)
    p = g.add_parser("family", parents=[common])
    p.add_argument("--rhos", default="0.4,0.3,0.2,0.1")
    p.add_argument("--compare-at", type=float, default=-1.5)
    _flow_args(p, nodes=256)
    p.set_defaults(func=cmd_ancient_family)
    p = g.add_parser("fit", parents=[common])
    p.add_argument("--traj", required=True)
    p.set_defaults(func=cmd_ancient_fit)

    g = sub.add_parser("diag", help="inequality checks").add_subparsers(dest="action", required=True)
    p = g.add_parser("check", parents=[common])
    p.add_argument("--traj", required=True)
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--all", action="store_true")
    sel.add_argument("--name", action="append", choices=sorted(diagnostics.INEQUALITY_CHECKS))
    p.set_defaults(func=cmd_diag_check)

    g = sub.add_parser("spectral", help="Robin eigenproblem").add_subparsers(dest="action", required=True)
    p = g.add_parser("eig", parents=[common])
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--even", action="store_true")
    p.add_argument("--modes", type=int, default=4, help="number of modes to include")
    p.set_defaults(func=cmd_spectral_eig)

    g = sub.add_parser("rotator", help="rotating-soliton scan").add_subparsers(dest="action", required=True)
    p = g.add_parser("scan", parents=[common])
    p.add_argument("--b-min", type=float, default=0.1)
    p.add_argument("--b-max", type=float, default=10.0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--s-max", type=float, default=50.0)
    p.add_argument("--ds", type=float, default=1e-3)
    p.set_defaults(func=cmd_rotator_scan)

    p = sub.add_parser("plot", parents=[common], help="SVG of stored frames")
    p.add_argument("--traj", required=True)
    p.add_argument("--every", type=int, default=10)
    p.add_argument("--barrier", action="append", help="overlay, e.g. theta=0.5")
    p.set_defaults(func=cmd_plot)
    return parser


def _apply_config(parser, args):
    with open(args.config) as fh:
        try:
            overrides = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config is not valid JSON: {exc}") from exc
    if not isinstance(overrides, dict):
        raise UsageError("--config must hold a JSON object")
    params = overrides.get("params", overrides)
    for k, v in params.items():
        dest = k.replace("-", "_")
        if not hasattr(args, dest) or dest in ("func", "group", "action", "config"):
            raise UsageError(f"config key {k!r} is not a parameter of this command")
        setattr(args, dest, v)
    return args


def run_config(args) -> RunConfig:
    skip = {"func", "group", "action", "config", "quiet", "jobs", "out"}
    cmd = [args.group] + ([args.action] if getattr(args, "action", None) else [])
    return RunConfig(command=cmd, params={k: v for k, v in vars(args).items() if k not in skip})


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.config:
            args = _apply_config(parser, args)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ancient.InsufficientDataError, diagnostics.EstimationError, flow.ExtinctionEstimateError) as exc:
        print(f"check could not be carried out: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
