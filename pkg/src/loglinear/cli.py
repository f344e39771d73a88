"""Command-line driver: ``loglinear {simulate,invariant,flowpipe,verify}``.

Exit codes: 0 success (or SAFE), 2 UNSAFE, 1 error.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import lie, scenario, svg
from .errors import LogLinearError
from .flowpipe import build_flow_pipe, pipe_containment, verify_safety, window_grid
from .invariant import algorithm1, axis_ratio, no_inversion_ellipsoid, saturation_box
from .sim import SimConfig, run_closed_loop, simulate_closed_loop

log = logging.getLogger("loglinear")

EXIT_OK, EXIT_ERROR, EXIT_UNSAFE = 0, 1, 2
LOG_ENV = "LOGLINEAR_LOG_LEVEL"


def _dump(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _ellipsoid(sc, cfg, inversion=True):
    inv = sc.data["invariant"]
    sys_ = sc.polytope(cfg)
    kw = dict(sigma0=inv["sigma0"], eps=inv["eps"], n_samp=inv["n_samp"])
    if inversion:
        return algorithm1(sys_, **kw)
    return no_inversion_ellipsoid(sys_, cfg=cfg, **kw)


def cmd_simulate(sc, out, args):
    cfg = sc.controller()
    ref = sc.reference()
    sim = sc.data["simulation"]
    dt = args.dt or sim["dt"]
    t_end = sim["t_end"] or (ref.traj.t1 - ref.traj.t0)
    sc_cfg = SimConfig(ref, cfg, sc.disturbance(), t_end, dt, tuple(sim["initial_error"]),
                       inversion=not args.no_inversion)
    trace = simulate_closed_loop(sc_cfg)
    trace.to_csv(os.path.join(out, "trace.csv"))
    summary = {
        "scenario": sc.name,
        "dt": dt,
        "t_end": t_end,
        "inversion": not args.no_inversion,
        "max_deviation": float(trace.deviation.max()),
        "max_log_error": float(np.linalg.norm(trace.log_error, axis=1).max()),
    }
    _dump(summary, os.path.join(out, "simulate.json"))
    pose = lie.pose_params(trace.X)
    posebar = lie.pose_params(trace.Xbar)
    fig_group = svg.Figure(svg._limits([pose[:, 0], posebar[:, 0]]), svg._limits([pose[:, 1], posebar[:, 1]]),
                           "group trajectories", "x [m]", "y [m]", equal=True)
    fig_group.line(posebar[:, 0], posebar[:, 1], svg.PALETTE[1], label="reference")
    fig_group.line(pose[:, 0], pose[:, 1], svg.PALETTE[0], dash="4 2", label="vehicle")
    fig_alg = svg.time_series(trace.t, [trace.zeta[:, k] for k in range(3)], ["zeta_x", "zeta_y", "zeta_theta"],
                              "log error (algebra)", "zeta")
    fig_dev = svg.time_series(trace.t, [trace.deviation], ["d(t)"], "model deviation", "d", log=True)
    svg.stack([fig_group, fig_alg, fig_dev], os.path.join(out, "simulate.svg"))
    print(f"max deviation {summary['max_deviation']:.3e}")
    return EXIT_OK


def cmd_invariant(sc, out, args):
    cfg = sc.controller()
    with_inv = _ellipsoid(sc, cfg, True)
    without = _ellipsoid(sc, cfg, False)
    box = saturation_box(with_inv.ellipsoid, cfg, sc.data["invariant"]["n_samp"])
    ratio = axis_ratio(with_inv.ellipsoid, without.ellipsoid)
    result = {
        "scenario": sc.name,
        "K": [float(v) for v in cfg.K.reshape(-1)],
        "inversion": with_inv.to_dict(),
        "no_inversion": without.to_dict(),
        "saturation": box.to_dict(),
        "axis_ratio": float(ratio),
    }
    _dump(result, os.path.join(out, "invariant.json"))
    svg.ellipsoid_views([with_inv.ellipsoid, without.ellipsoid], ["with inversion", "without inversion"],
                        os.path.join(out, "invariant.svg"))
    print(f"converged in {with_inv.iterations} iterations, sigma {with_inv.sigma:.5f}, "
          f"axis ratio {ratio:.3f}")
    return EXIT_OK


def _pipe(sc, args):
    cfg = sc.controller()
    traj = sc.trajectory()
    E = _ellipsoid(sc, cfg, not args.no_inversion).ellipsoid
    fp = sc.data["flowpipe"]
    grid = window_grid(traj.t0, traj.t1, fp["window"])
    pipe = build_flow_pipe(traj, E, grid, n_dirs=fp["n_dirs"], sweep_steps=fp["sweep_steps"])
    return cfg, traj, E, pipe


def monte_carlo(sc, cfg, traj, E, seed, inversion=True, runs=None, dt=None):
    """Disturbed runs started uniformly inside the ellipsoid; returns the run dict."""
    mc = sc.data["monte_carlo"]
    rng = np.random.default_rng(seed)
    n = runs or mc["runs"]
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    z0 = E.boundary(dirs) * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
    ref = sc.reference(traj)
    X0 = ref.initial_pose() @ lie.inverse(lie.exp_group(z0))
    return run_closed_loop(ref, cfg, X0, sc.disturbance_bank(n, rng), traj.t1 - traj.t0, dt or mc["dt"],
                           inversion=inversion)


def cmd_flowpipe(sc, out, args):
    cfg, traj, E, pipe = _pipe(sc, args)
    seed = sc.seed if args.seed is None else args.seed
    runs = monte_carlo(sc, cfg, traj, E, seed, not args.no_inversion)
    positions = runs["X"][..., :2, 2]
    frac, _ = pipe_containment(pipe, runs["t"], positions)
    _dump({"scenario": sc.name, "segments": [s.to_dict() for s in pipe],
           "monte_carlo_runs": int(positions.shape[1]), "containment_fraction": frac},
          os.path.join(out, "flowpipe.json"))
    ref = traj.position(np.linspace(traj.t0, traj.t1, 400))
    svg.flowpipe_overlay(pipe, sc.obstacles(), os.path.join(out, "flowpipe.svg"), ref,
                         [positions[:, k] for k in range(positions.shape[1])], title=sc.name)
    print(f"{len(pipe)} segments, containment {frac:.4f}")
    return EXIT_OK


def cmd_verify(sc, out, args):
    _, traj, _, pipe = _pipe(sc, args)
    obstacles = sc.obstacles()
    report = verify_safety(pipe, obstacles)
    report.to_json(os.path.join(out, "report.json"))
    ref = traj.position(np.linspace(traj.t0, traj.t1, 400))
    svg.flowpipe_overlay(pipe, obstacles, os.path.join(out, "verify.svg"), ref, title=f"{sc.name}: {report.verdict}")
    print(report.verdict)
    return EXIT_OK if report.safe else EXIT_UNSAFE


COMMANDS = {"simulate": cmd_simulate, "invariant": cmd_invariant, "flowpipe": cmd_flowpipe, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="loglinear", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", required=True, help="scenario JSON file or bundled name (small, large)")
        s.add_argument("--out", default=None, help="output directory (default from scenario)")
        s.add_argument("--dt", type=float, default=None, help="override the simulation step")
        s.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        s.add_argument("--no-inversion", action="store_true", help="use the linear law u = -BKz")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = scenario.load(args.scenario)
        if args.dt is not None and args.dt <= 0:
            raise LogLinearError("--dt must be positive")
        out = args.out or sc.data["output_dir"]
        os.makedirs(out, exist_ok=True)
        return COMMANDS[args.command](sc, out, args)
    except (LogLinearError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
