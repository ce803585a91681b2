"""Command-line front end: ``revdmp {train,rollout,scenario,verify,validate}``.

Exit codes: 0 success, 2 usage, 3 parse/validation, 4 numeric domain,
5 property failure. Every error path prints one line
``error: <code>: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import io
from . import rotations as rot
from .classical import ClassicalDMP
from .errors import (DegenerateDemoError, DomainError, IntegrationError, InvalidArgument, RevDMPError,
                     ValidationError)
from .orientation import OrientationDMP
from .reversible import Perturbation, ReversibleDMP
from .scenarios import REGISTRY, load_scenario, run_scenario
from .sim import QuaternionTrajectory, default_dt

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_DOMAIN, EXIT_PROPERTY = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code, self.status = code, status


def _status_for(exc: Exception) -> int:
    if isinstance(exc, (DomainError, IntegrationError)):
        return EXIT_DOMAIN
    if isinstance(exc, (ValidationError, DegenerateDemoError)):
        return EXIT_INVALID
    if isinstance(exc, InvalidArgument):
        return EXIT_USAGE
    return EXIT_INVALID


# --------------------------------------------------------------------------
# commands


def cmd_train(args) -> int:
    demo = io.read_demo(args.demo)
    common = dict(n_kernels=args.kernels, a_h=args.a_h, canonical=args.canonical, method=args.method)
    if args.kind == "orientation":
        if not isinstance(demo, tuple):
            raise ValidationError("orientation training needs qw, qx, qy, qz columns")
        model = OrientationDMP.train(*demo, K=args.K, D=args.D, **common)
    else:
        if isinstance(demo, tuple):
            raise ValidationError(f"{args.kind} training needs position columns, got quaternions")
        if args.kind == "reversible":
            model = ReversibleDMP.train(demo.t, demo.y, K=args.K, D=args.D, **common)
        else:
            model = ClassicalDMP.train(demo, alpha_z=args.alpha_z, **common)
    io.save_model(model, args.out, provenance={"training_sha256": io.file_sha256(args.demo)})
    print(f"trained {args.kind} model on {len(_demo_t(demo))} samples; "
          f"fit residual {model.fit_residual:.3e}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _demo_t(demo):
    return demo[0] if isinstance(demo, tuple) else demo.t


def _load_events(path, n):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"events file is not valid JSON: {e}") from None
    if not isinstance(raw, list):
        raise ValidationError("events file must hold a list of events")
    events = []
    for e in raw:
        if not isinstance(e, dict) or "t" not in e or set(e) - {"t", "goal", "start", "kick"}:
            raise ValidationError(f"bad event {e!r}; expected keys t, goal, start, kick")
        events.append(Perturbation(float(e["t"]), e.get("goal"), e.get("start"), e.get("kick")))
    return events


def cmd_rollout(args) -> int:
    model = io.load_model(args.model)
    direction = "forward" if args.direction == "fwd" else "backward"
    dt = args.dt if args.dt is not None else default_dt()
    if isinstance(model, OrientationDMP):
        if args.events or args.perturb_at is not None:
            raise InvalidArgument("events are not supported for orientation models")
        goal = _quat_arg(args.goal, "--goal")
        start = _quat_arg(args.start, "--start")
        traj = model.rollout(direction, args.tau, args.duration, dt, goal=goal, start=start)
        target = traj.meta["goal"] if direction == "forward" else traj.meta["start"]
        err = float(rot.geodesic_distance(traj.Q[-1], np.asarray(target)))
        label = "geodesic error (rad)"
    else:
        events = _load_events(args.events, model.n_dofs) if args.events else []
        goal, start = args.goal, args.start
        if args.perturb_at is not None:
            if goal is None and start is None:
                raise InvalidArgument("--perturb-at needs --goal and/or --start")
            events.append(Perturbation(args.perturb_at, goal=goal, start=start))
            goal = start = None
        traj = model.rollout(direction, args.tau, args.duration, dt, goal=goal, start=start, events=events)
        target = traj.meta["goal"] if direction == "forward" else traj.meta["start"]
        if events:
            # the last anchors in force define where the motion should end
            for ev in sorted(events, key=lambda e: e.t):
                pick = ev.goal if direction == "forward" else ev.start
                target = pick if pick is not None else target
        err = float(np.max(np.abs(traj.y[-1] - np.asarray(target, float))))
        label = "error"
    meta = {"model": os.path.basename(args.model), "direction": direction,
            "tau": traj.meta.get("tau"), "dt": dt, "goal": traj.meta.get("goal"),
            "start": traj.meta.get("start")}
    io.write_trajectory(traj, args.out, meta)
    which = "goal" if direction == "forward" else "start"
    print(f"terminal {label} vs {which}: {err:.3e}")
    print(f"wrote {args.out} ({len(traj.t)} samples)")
    return EXIT_OK


def _quat_arg(values, flag):
    if values is None:
        return None
    if len(values) != 4:
        raise InvalidArgument(f"{flag} for an orientation model needs 4 values (w x y z)")
    return rot.normalize(np.asarray(values, float))


def _simple_meta(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if isinstance(v, (str, int, float, list)) or v is None}


def cmd_scenario(args) -> int:
    if args.config:
        scenarios = [load_scenario(args.config)]
    elif args.all:
        scenarios = list(REGISTRY)
    elif args.name:
        if args.name not in REGISTRY:
            raise ValidationError(f"unknown scenario {args.name!r}; known: {', '.join(REGISTRY)}")
        scenarios = [args.name]
    else:
        raise InvalidArgument("give a scenario name, --all or --config")
    summary = []
    all_ok = True
    for sc in scenarios:
        res = run_scenario(sc, dt=args.dt)
        all_ok &= res.passed
        summary.append({"scenario": res.name, "passed": res.passed})
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}")
        for p in res.properties:
            op = "<" if p.kind == "max" else ">"
            print(f"    {'ok ' if p.passed else 'BAD'} {p.name} = {p.value:.4g} ({op} {p.bound:g})")
        if args.out:
            d = os.path.join(args.out, res.name)
            os.makedirs(d, exist_ok=True)
            for key, traj in sorted(res.trajectories.items()):
                io.write_trajectory(traj, os.path.join(d, key + ".csv"),
                                    {"scenario": res.name, "params": res.params,
                                     "trajectory": key, **_simple_meta(traj.meta)})
            with open(os.path.join(d, "report.json"), "w") as fh:
                json.dump(io._jsonable(res.report()), fh, sort_keys=True, indent=1)
                fh.write("\n")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            json.dump({"passed": all_ok, "scenarios": summary}, fh, sort_keys=True, indent=1)
            fh.write("\n")
    if not all_ok:
        print("error: property-failure: at least one scenario property failed", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def _period(args, path) -> float:
    if args.period is not None:
        return args.period
    try:
        with open(path + ".meta.json") as fh:
            tau = json.load(fh).get("tau")
    except (OSError, json.JSONDecodeError):
        tau = None
    if tau is None:
        raise InvalidArgument("--mirror needs --period (or a sidecar with 'tau' next to the first file)")
    return float(tau)


def cmd_verify(args) -> int:
    from .sim import Trajectory, coincide_error, mirror_error

    a, b = io.read_trajectory(args.a), io.read_trajectory(args.b)
    if isinstance(a, QuaternionTrajectory) != isinstance(b, QuaternionTrajectory):
        raise ValidationError("trajectory schemas differ (orientation vs position)")
    pa, pb = io.trajectory_positions(a), io.trajectory_positions(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValidationError(f"trajectory schemas differ ({pa.shape[1]} vs {pb.shape[1]} DoFs)")
    ta = Trajectory(a.t, pa, pa, pa)
    tb = Trajectory(b.t, pb, pb, pb)
    if args.mirror:
        diff = mirror_error(ta, tb, _period(args, args.a))
        mode = "mirror"
    else:
        diff = coincide_error(ta, tb)
        mode = "coincide"
    ok = diff <= args.tolerance
    print(f"{mode} difference {diff:.3e} (tolerance {args.tolerance:g}): {'pass' if ok else 'fail'}")
    if not ok:
        print(f"error: property-failure: {mode} difference {diff:.3e} exceeds {args.tolerance:g}",
              file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_validate(args) -> int:
    model = io.load_model(args.model)
    kind = {ReversibleDMP: "reversible", ClassicalDMP: "classical", OrientationDMP: "orientation"}[type(model)]
    print(f"ok: {kind} model, {model.kernels.n} kernels")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revdmp", description="Reversible dynamic movement primitives.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model from a demonstration CSV")
    t.add_argument("demo")
    t.add_argument("--kind", choices=["reversible", "classical", "orientation"], default="reversible")
    t.add_argument("--out", required=True)
    t.add_argument("--kernels", type=int, default=30)
    t.add_argument("--a-h", type=float, default=1.0, dest="a_h")
    t.add_argument("--K", type=float, default=100.0)
    t.add_argument("--D", type=float, default=20.0)
    t.add_argument("--alpha-z", type=float, default=20.0, dest="alpha_z")
    t.add_argument("--canonical", choices=["linear", "exponential"], default="linear")
    t.add_argument("--method", choices=["ls", "lwr"], default="ls")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("rollout", help="integrate a model and write a trajectory CSV")
    r.add_argument("model")
    r.add_argument("--direction", choices=["fwd", "bwd"], default="fwd")
    r.add_argument("--tau", type=float)
    r.add_argument("--goal", type=float, action="append", help="repeat once per DoF")
    r.add_argument("--start", type=float, action="append", help="repeat once per DoF")
    r.add_argument("--perturb-at", type=float, dest="perturb_at",
                   help="apply --goal/--start at this time instead of from the beginning")
    r.add_argument("--events", help="JSON list of {t, goal, start, kick}")
    r.add_argument("--dt", type=float)
    r.add_argument("--duration", type=float)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_rollout)

    s = sub.add_parser("scenario", help="run registered scenarios")
    s.add_argument("name", nargs="?")
    s.add_argument("--all", action="store_true")
    s.add_argument("--config", help="JSON scenario file {name, params, dt}")
    s.add_argument("--dt", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scenario)

    v = sub.add_parser("verify", help="compare two trajectory files")
    v.add_argument("a")
    v.add_argument("b")
    mode = v.add_mutually_exclusive_group(required=True)
    mode.add_argument("--mirror", action="store_true")
    mode.add_argument("--coincide", action="store_true")
    v.add_argument("--tolerance", type=float, default=1e-3)
    v.add_argument("--period", type=float, help="reflection time for --mirror (defaults to tau)")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("validate", help="load a model file and check its invariants")
    m.add_argument("model")
    m.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except RevDMPError as e:
        print(f"error: {e.code}: {_one_line(e)}", file=sys.stderr)
        return _status_for(e)
    except FileNotFoundError as e:
        print(f"error: io: no such file {e.filename}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: io: {_one_line(e)}", file=sys.stderr)
        return EXIT_INVALID
    except FloatingPointError as e:
        print(f"error: integration: {_one_line(e)}", file=sys.stderr)
        return EXIT_DOMAIN


def _one_line(e) -> str:
    return " ".join(str(e).split())


if __name__ == "__main__":
    sys.exit(main())
