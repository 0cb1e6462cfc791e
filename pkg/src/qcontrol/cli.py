"""Command line entry point ``qcontrol``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .diagnostics import DIAGNOSTICS, run_diagnostic, substream_seed
from .errors import ConfigError, GeometryOverflow, QControlError
from .geometry import build_cutoff, build_multiplier, control_region_bump
from .hum import HumProblem, hum_solve, observability_constant
from .io import OutputWriter
from .nonlinear import NonlinearControlProblem, nonlinear_null_control
from .propagators import TimeGrid, nls_solve, norm_bundle, picard_solve
from .spectral import Field, Grid, make_grid, random_band_limited, sobolev_norm, sobolev_norms

EXIT_CODES = """exit codes:
  0  every verdict passed
  1  a verdict failed (results are still written)
  2  configuration or geometry error
  3  solver did not converge
  4  blowup detected
  5  input/output error
"""

HUM_VERIFY_TOL = 1e-3
NONLINEAR_VERIFY_TOL = 1e-2


def build_target(cfg: RunConfig, grid: Grid) -> Field:
    if cfg.u0_kind == "zero" or cfg.u0_norm == 0:
        return Field.zeros(grid)
    if cfg.u0_kind == "bump":
        return control_region_bump(grid, cfg.radius, cfg.u0_norm)
    rng = np.random.default_rng(substream_seed(cfg.seed, "u0"))
    f = random_band_limited(grid, rng, np.pi * (grid.n // 6) / grid.half_side)
    return f * (cfg.u0_norm / sobolev_norm(f, 1))


def hum_problem(cfg: RunConfig) -> HumProblem:
    grid = make_grid(cfg.dimension, cfg.n, cfg.half_side)
    phi = build_cutoff(grid, cfg.radius)
    return HumProblem(grid, phi, cfg.horizon, cfg.nt, build_target(cfg, grid))


def _every(nt: int) -> int:
    return max(1, nt // 16)


def cmd_simulate(cfg: RunConfig, out: OutputWriter, args) -> dict:
    problem = hum_problem(cfg)
    grid, times = problem.grid, problem.times
    u0 = problem.target_initial
    traj = nls_solve(u0, None, times)
    mass = sobolev_norms(traj.frames, grid, 0)
    h1 = sobolev_norms(traj.frames, grid, 1)
    drift = float(np.max(np.abs(mass - mass[0])) / mass[0]) if mass[0] > 0 else 0.0
    bundle = norm_bundle(traj)
    summary = {"norms": bundle.to_dict(), "mass_drift": drift}
    if sobolev_norm(u0, 1) <= 0.1:
        picard = picard_solve(u0, None, times, cfg.picard_tol, cfg.picard_max_iter)
        gap = sobolev_norm(picard.trajectory.final - traj.final, 1)
        summary["picard"] = {"iterations": picard.iterations, "ratios": picard.ratios,
                             "h1_gap_to_split_step": gap}
    out.json("norms.json", summary)
    out.trajectory("trajectory", traj, _every(times.nt))
    out.plot("norm_series", ["t", "l2", "h1"], zip(times.nodes, mass, h1), "norms along the flow")
    out.spectrum("spectrum_final.csv", traj.final)
    out.snapshot("cutoff", problem.phi.field)
    for j, comp in enumerate(build_multiplier(grid, cfg.radius).components):
        out.snapshot(f"multiplier_{j + 1}", comp)
    return {"mass_conservation": drift <= 1e-10}


def cmd_hum(cfg: RunConfig, out: OutputWriter, args) -> dict:
    problem = hum_problem(cfg)
    sol = hum_solve(problem, cfg.cg_tol, cfg.cg_max_iter)
    stats = sol.to_dict()
    stats["horizon"] = problem.horizon
    stats["radius"] = problem.phi.radius
    out.json("hum_solution.json", stats)
    out.snapshot("minimizer", sol.minimizer)
    out.snapshot("target", problem.target_initial)
    out.trajectory("control", sol.control, _every(problem.nt))
    out.plot("cg_history", ["iteration", "relative_residual"], enumerate(sol.residual_history),
             "CG residual", log_y=True)
    return {"null_control": sol.relative_terminal_residual <= HUM_VERIFY_TOL}


def cmd_nlcontrol(cfg: RunConfig, out: OutputWriter, args) -> dict:
    problem = NonlinearControlProblem(
        hum_problem(cfg),
        smallness_delta=cfg.smallness_delta,
        ball_radius=cfg.ball_radius,
        tol=cfg.fixed_point_tol,
        max_iter=cfg.fixed_point_max_iter,
    )
    res = nonlinear_null_control(problem)
    out.json("control_result.json", res.to_dict())
    header = ["k", "increment", "contraction_factor", "claim1_ratio", "claim2_ratio"]
    out.plot("iterate_history", header, res.history_rows(), "fixed-point history", log_y=True)
    out.plot("contraction_factors", ["k", "factor"],
             [(k + 2, f) for k, f in enumerate(res.contraction_factors)], "contraction factors", log_y=True)
    out.snapshot("phi0", res.phi0)
    out.trajectory("control", res.control, _every(cfg.nt))
    ok = all(f < 1 for f in res.contraction_factors) and res.relative_terminal_residual <= NONLINEAR_VERIFY_TOL
    return {"nonlinear_null_control": ok}


def parse_sweep(text: str) -> list[float]:
    try:
        a, b, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"radius sweep must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ConfigError(f"radius sweep needs a <= b and step > 0, got {text!r}")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + j * step, 12) for j in range(count)]


def cmd_observe(cfg: RunConfig, out: OutputWriter, args) -> dict:
    grid = make_grid(cfg.dimension, cfg.n, cfg.half_side)
    radii = parse_sweep(args.radius_sweep) if args.radius_sweep else [cfg.radius]
    rows = []
    for radius in radii:
        try:
            phi = build_cutoff(grid, radius)
        except GeometryOverflow as exc:
            raise GeometryOverflow(f"sweep radius {radius}: {exc}") from None
        problem = HumProblem(grid, phi, cfg.horizon, cfg.nt, Field.zeros(grid))
        est = observability_constant(problem, method=args.method, seed=substream_seed(cfg.seed, "lanczos"))
        rows.append((radius, cfg.horizon, est.c_obs, est.iterations))
        out.snapshot(f"worst_mode_R{radius:g}", est.worst_mode)
    out.csv("observability.csv", ["R", "T", "c_obs", "lanczos_iters"], rows)
    out.plot("observability_sweep", ["R", "c_obs"], [(r[0], r[2]) for r in rows],
             "observability constant", log_y=True)
    values = [r[2] for r in rows]
    return {
        "positive": all(v > 0 for v in values),
        "non_increasing": all(b <= a for a, b in zip(values, values[1:])),
    }


def cmd_diag(cfg: RunConfig, out: OutputWriter, args) -> dict:
    names = list(DIAGNOSTICS) if args.name == "all" else [args.name]
    problem = hum_problem(cfg)
    problem = problem.with_target(Field.zeros(problem.grid))
    reports = [run_diagnostic(name, problem, cfg.seed, cfg.samples) for name in names]
    for rep in reports:
        out.json(f"{rep.name}.json", rep.to_dict())
        keys = sorted({k for row in rep.refinement_trend for k in row})
        out.csv(f"{rep.name}_trend.csv", keys, ([row.get(k) for k in keys] for row in rep.refinement_trend))
    if args.name == "all":
        out.csv("summary.csv", ["label", "name", "lhs", "rhs", "residual_or_ratio", "verdict", "inputs_digest"],
                [(r.label, r.name, r.lhs, r.rhs, r.residual_or_ratio, r.verdict, r.inputs_digest)
                 for r in reports])
    return {r.name: r.verdict in ("pass", "skipped") for r in reports}


COMMANDS = {
    "simulate": cmd_simulate,
    "hum": cmd_hum,
    "nlcontrol": cmd_nlcontrol,
    "observe": cmd_observe,
    "diag": cmd_diag,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file; flags below override it")
    p.add_argument("--dim", type=int, dest="dimension")
    p.add_argument("--n", type=int)
    p.add_argument("--box", type=float, dest="half_side", help="half side L of the box [-L, L)^d")
    p.add_argument("--radius", type=float, help="cutoff radius R")
    p.add_argument("--horizon", type=float, help="control horizon T")
    p.add_argument("--steps", type=int, dest="nt", help="number of time steps")
    p.add_argument("--seed", type=int)
    p.add_argument("--u0-kind", choices=("bump", "random", "zero"), dest="u0_kind")
    p.add_argument("--u0-norm", type=float, dest="u0_norm", help="H1 norm of the initial state")
    p.add_argument("--out", dest="output_dir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcontrol",
        description="Null control of the defocusing quintic Schrodinger equation on a periodic box.",
        epilog=EXIT_CODES + "\nQCONTROL_THREADS caps the threads used for dense Gramian assembly.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="free nonlinear evolution with norm bookkeeping")
    _common(p)
    p = sub.add_parser("hum", help="linear null control by the Hilbert Uniqueness Method")
    _common(p)
    p.add_argument("--tol", type=float, dest="cg_tol", help="relative CG tolerance")
    p = sub.add_parser("nlcontrol", help="nonlinear null control by fixed-point iteration")
    _common(p)
    p.add_argument("--tol", type=float, dest="fixed_point_tol", help="fixed-point tolerance")
    p.add_argument("--delta", type=float, dest="smallness_delta", help="smallness bound on ||u0||_H1")
    p.add_argument("--ball", type=float, dest="ball_radius", help="fixed-point ball radius in H^-1")
    p = sub.add_parser("observe", help="observability constant, optionally over a radius sweep")
    _common(p)
    p.add_argument("--radius-sweep", help="radii a:b:step (inclusive)")
    p.add_argument("--method", choices=("auto", "dense", "lanczos"), default="auto")
    p = sub.add_parser("diag", help="numerical checks of identities and inequalities")
    _common(p)
    p.add_argument("name", choices=list(DIAGNOSTICS) + ["all"])
    p.add_argument("--sweep", type=int, dest="samples", help="random samples per sweep")
    return parser


OVERRIDES = ("dimension", "n", "half_side", "radius", "horizon", "nt", "seed", "u0_kind", "u0_norm",
             "output_dir", "cg_tol", "fixed_point_tol", "smallness_delta", "ball_radius", "samples")


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {k: getattr(args, k, None) for k in OVERRIDES}
    try:
        return cfg.updated(**changes)
    except QControlError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def run(argv=None) -> tuple[int, Optional[dict]]:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = OutputWriter(cfg.output_dir, cfg.to_dict(), __version__)
        verdicts = COMMANDS[args.command](cfg, out, args)
        manifest = out.finish(verdicts, {"command": args.command})
    except QControlError as exc:
        print(f"qcontrol: error: {exc}", file=sys.stderr)
        return exc.exit_code, None
    failed = [k for k, ok in verdicts.items() if not ok]
    for key, ok in verdicts.items():
        print(f"{key}: {'pass' if ok else 'FAIL'}")
    return (1 if failed else 0), manifest


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
