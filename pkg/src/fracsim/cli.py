"""Command-line entry points for scripted runs, analysis and the live service.

Subcommands:
  simulate        run a device-input script, write trajectory CSV + deviation report
  replay          identical engine path for a recorded session input log
  collision-fuzz  compare box contact queries against the independent oracle
  fluoro          render one fluoroscopic view to PGM + overlay text
  analyze         deviation report from an existing trajectory CSV
  serve           WebSocket service exposing the live engine

The default scene directory comes from $FRACSIM_SCENE_DIR (fallback ./scenes).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    from .sceneio import default_scene_path

    parser = argparse.ArgumentParser(prog="fracsim")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scene(p):
        p.add_argument("--scene", default=default_scene_path(),
                       help="scene YAML (default: %(default)s)")
        p.add_argument("--dt", type=float, default=None, help="override the scene timestep")

    sim = sub.add_parser("simulate", help="batch-run a device script")
    add_scene(sim)
    sim.add_argument("--script", required=True, help="device input CSV")
    sim.add_argument("--out", required=True, help="trajectory CSV output path")

    rep = sub.add_parser("replay", help="re-run a recorded session input log")
    add_scene(rep)
    rep.add_argument("--script", required=True, help="recorded session CSV")
    rep.add_argument("--out", required=True)

    fuzz = sub.add_parser("collision-fuzz", help="randomized contact-query cross-check")
    fuzz.add_argument("--pairs", "-n", type=int, default=10000)
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--out", default=None, help="write the report here as well")

    fl = sub.add_parser("fluoro", help="render one view of the scene at rest")
    add_scene(fl)
    fl.add_argument("--angles", default="0,0,0",
                    help="C-arm rotation delta from the scene home, degrees a,b,g")
    fl.add_argument("--out", required=True, help="output path prefix (.pgm, .polylines)")

    an = sub.add_parser("analyze", help="deviation report from a trajectory CSV")
    an.add_argument("--trajectory", required=True)
    an.add_argument("--out", default=None, help="per-tick error CSV output")

    srv = sub.add_parser("serve", help="live WebSocket service")
    add_scene(srv)
    srv.add_argument("--bind", default="127.0.0.1:8765", help="host:port")
    srv.add_argument("--snapshot-rate", type=float, default=60.0)
    srv.add_argument("--realtime", action=argparse.BooleanOptionalAction, default=True,
                     help="pace the engine to the wall clock")
    srv.add_argument("--record", default=None,
                     help="record applied device inputs to this CSV (replayable)")
    srv.add_argument("--static", default=None,
                     help="serve static UI files from this directory over HTTP")
    return parser


def _load_scene(args):
    from .sceneio import load_scene

    scene = load_scene(args.scene)
    if args.dt is not None:
        if args.dt <= 0:
            raise SystemExit("--dt must be positive")
        scene = dataclasses.replace(scene, dt=args.dt)
    return scene


def _run_simulation(args) -> int:
    from .engine import deviation_report, run_script
    from .sceneio import read_script_csv, write_deviation_csv, write_trajectory_csv

    scene = _load_scene(args)
    script = read_script_csv(args.script)
    samples = run_script(scene, script)
    write_trajectory_csv(samples, args.out)

    base = args.out[:-4] if args.out.endswith(".csv") else args.out
    faults = sum(1 for s in samples if s.faults.any())
    unreachable = sum(1 for s in samples if s.faults.ik_unreachable)
    lines = [f"ticks: {len(samples)}", f"fault ticks: {faults}",
             f"unreachable ticks: {unreachable}"]
    if samples:
        report = deviation_report(samples)
        lines += report.summary_lines()
        write_deviation_csv(report, base + ".report.csv")
    with open(base + ".report.txt", "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if faults == 0 else 1


def _run_fuzz(args) -> int:
    from .fuzz import collision_fuzz, write_fuzz_report

    if args.pairs <= 0:
        print("error: --pairs must be positive", file=sys.stderr)
        return 2
    report = collision_fuzz(args.pairs, args.seed)
    for line in report.summary_lines():
        print(line)
    if args.out:
        write_fuzz_report(report, args.out)
    return 0 if report.clean else 1


def _run_fluoro(args) -> int:
    from .engine import fluoro_objects, initial_state
    from .fluoro import capture, set_carm, write_overlay_text, write_pgm
    from .geometry import EulerAngles

    scene = _load_scene(args)
    try:
        parts = [float(v) for v in args.angles.split(",")]
        if len(parts) != 3:
            raise ValueError
    except ValueError:
        print(f"error: --angles expects three comma-separated degrees, got {args.angles!r}",
              file=sys.stderr)
        return 2
    carm = set_carm(scene.carm_home, EulerAngles(*np.deg2rad(parts)))
    state = initial_state(scene)
    objects, lines = fluoro_objects(scene, state)
    image = capture(objects, carm, scene.fluoro, opacity=scene.opacity, lines=lines)
    write_pgm(image, args.out + ".pgm")
    write_overlay_text(image, args.out + ".polylines")
    print(f"wrote {args.out}.pgm and {args.out}.polylines")
    return 0


def _run_analyze(args) -> int:
    from .engine import deviation_report
    from .sceneio import read_trajectory_csv, write_deviation_csv

    samples = read_trajectory_csv(args.trajectory)
    if not samples:
        print("error: empty trajectory log", file=sys.stderr)
        return 2
    report = deviation_report(samples)
    for line in report.summary_lines():
        print(line)
    if args.out:
        write_deviation_csv(report, args.out)
    return 0


def _run_serve(args) -> int:
    from .service import serve

    scene = _load_scene(args)
    host, _, port = args.bind.rpartition(":")
    try:
        serve(scene, host or "127.0.0.1", int(port), snapshot_rate=args.snapshot_rate,
              realtime=args.realtime, record_path=args.record, static_dir=args.static)
    except KeyboardInterrupt:
        pass
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    from .sceneio import SceneParseError, SceneValidationError

    try:
        if args.command in ("simulate", "replay"):
            return _run_simulation(args)
        if args.command == "collision-fuzz":
            return _run_fuzz(args)
        if args.command == "fluoro":
            return _run_fluoro(args)
        if args.command == "analyze":
            return _run_analyze(args)
        if args.command == "serve":
            return _run_serve(args)
    except (SceneParseError, SceneValidationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
