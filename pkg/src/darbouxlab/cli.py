"""Command line entry point: ``darbouxlab {verify,scatter,su3-flow,darboux}``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on
configuration or file errors.  Settings come from defaults, then an optional
``--config`` file of ``key = value`` lines, then command line flags.  The
default output directory can be set with ``DARBOUXLAB_OUT``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .darboux import darboux_coordinates
from .errors import ConfigError, DarbouxLabError, FileFormatError
from .io import load_matrix, load_potential, read_config_file, write_csv, write_json
from .matgroup import default_schedule, reverse_bubble_schedule
from .poisson import DiagonalGenerator
from .scattering import Potential
from .su3 import is_su3, pendulum_flow, random_su3
from .suites import SUITES, ExperimentConfig, FlowSpec, pendulum_checks, run_suite, scatter_run, trial_rng

ENV_OUT = "DARBOUXLAB_OUT"
SCATTER_LIMITS = {"p_drift": 1e-8, "q_slope_residual": 1e-6}


def demo_potential_path():
    return resources.files("darbouxlab") / "data" / "three_wave_demo.json"


def _parse_extra(extra: list[str]) -> dict[str, str]:
    """``--tol-NAME VALUE`` or ``--tol-NAME=VALUE`` pairs left over by argparse."""
    out = {}
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--tol-"):
            raise ConfigError(f"unrecognized argument {arg!r}")
        if "=" in arg:
            key, value = arg[2:].split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"{arg} needs a value")
            key, value = arg[2:], extra[i + 1]
            i += 1
        out[key.replace("-", "_")] = value
        i += 1
    return out


def _config(args, extra: list[str]) -> ExperimentConfig:
    values: dict = {"out_dir": os.environ.get(ENV_OUT, "darbouxlab_out")}
    if args.config:
        values.update(read_config_file(args.config))
    flags = {"seed": args.seed, "n": args.n, "trials": args.trials, "out_dir": args.out, "L": args.grid_L,
             "h": args.grid_h, "xi_min": args.grid_xi_min, "xi_max": args.grid_xi_max, "n_xi": args.grid_n_xi,
             "su3_t": getattr(args, "t", None) if args.command == "su3-flow" else None,
             "su3_steps": getattr(args, "steps", None)}
    values.update({k: v for k, v in flags.items() if v is not None})
    values.update(_parse_extra(extra))
    return ExperimentConfig.from_mapping(values)


def _parse_mu(text: str | None, n: int) -> DiagonalGenerator:
    if text is None:
        return DiagonalGenerator.centered(1j * np.linspace(1.0, -0.6, n) ** 2)
    try:
        vals = [complex(v.strip().replace(" ", "")) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse mu {text!r}") from exc
    if len(vals) != n:
        raise ConfigError(f"mu has {len(vals)} entries but the potential is {n} x {n}")
    try:
        return DiagonalGenerator(np.array(vals))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_verify(args, cfg: ExperimentConfig) -> int:
    report = run_suite(args.suite, cfg)
    for line in report.lines():
        print(line)
    print(f"{'PASS' if report.passed else 'FAIL'} {args.suite}: report in {Path(cfg.out_dir) / f'report_{args.suite}.json'}")
    return 0 if report.passed else 1


def cmd_scatter(args, cfg: ExperimentConfig) -> int:
    q: Potential = load_potential(args.potential or demo_potential_path())
    flow = None
    if args.t is not None:
        flow = FlowSpec(_parse_mu(args.mu, q.n), args.k, args.t)
    summary = scatter_run(q, cfg, flow)
    print(json.dumps(summary, indent=1, sort_keys=True))
    if flow is None:
        return 0
    inv = summary["invariance"]
    return 0 if all(inv[k] <= lim for k, lim in SCATTER_LIMITS.items()) else 1


def cmd_su3_flow(args, cfg: ExperimentConfig) -> int:
    if args.matrix:
        a0 = load_matrix(args.matrix)
        if not is_su3(a0, 1e-8):
            raise ConfigError("starting matrix is not in SU(3)")
    else:
        a0 = random_su3(trial_rng(cfg.seed, "su3-flow", 0))
    traj = pendulum_flow(a0, cfg.su3_t, steps=cfg.su3_steps)
    header, data = traj.csv_rows()
    path = Path(cfg.out_dir) / "pendulum.csv"
    write_csv(path, header, data)
    summary = pendulum_checks(traj)
    print(json.dumps({"csv": str(path), **summary}, indent=1, sort_keys=True))
    limits = {"actions_drift": cfg.tol("actions_drift"), "energy_drift": cfg.tol("energy_drift"),
              "quadratic": cfg.tol("quadratic")}
    return 0 if all(summary[k] <= v for k, v in limits.items()) else 1


def cmd_darboux(args, cfg: ExperimentConfig) -> int:
    a = load_matrix(args.matrix)
    n = a.shape[0]
    sched = reverse_bubble_schedule(n) if args.schedule == "reverse" else default_schedule(n)
    chart = darboux_coordinates(a, sched)
    obj = chart.to_json()
    write_json(Path(cfg.out_dir) / "chart.json", obj)
    print(json.dumps(obj, indent=1, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./darbouxlab_out)")
    common.add_argument("--config", help="file of 'key = value' lines")
    common.add_argument("--grid-L", dest="grid_L", type=float)
    common.add_argument("--grid-h", dest="grid_h", type=float)
    common.add_argument("--grid-xi-min", dest="grid_xi_min", type=float)
    common.add_argument("--grid-xi-max", dest="grid_xi_max", type=float)
    common.add_argument("--grid-n-xi", dest="grid_n_xi", type=int)

    parser = argparse.ArgumentParser(prog="darbouxlab", description=__doc__.split("\n")[0],
                                     epilog="Tolerance overrides: --tol-NAME VALUE, e.g. --tol-jacobi 1e-8.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))

    p = sub.add_parser("scatter", parents=[common], help="scatter a potential file, optionally evolve the data")
    p.add_argument("--potential", help="potential JSON (default: bundled three-wave demo)")
    p.add_argument("--mu", help="comma-separated diagonal of mu, e.g. '1j,-0.3j,-0.7j'")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--t", type=float, help="evolve the scattering data to this time")

    p = sub.add_parser("su3-flow", parents=[common], help="pendulum flow on SU(3), written as CSV")
    p.add_argument("--matrix", help="starting SU(3) matrix JSON (default: seeded Haar sample)")
    p.add_argument("--t", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("darboux", parents=[common], help="Darboux chart of a matrix")
    p.add_argument("matrix")
    p.add_argument("--schedule", choices=("default", "reverse"), default="default")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    handlers = {"verify": cmd_verify, "scatter": cmd_scatter, "su3-flow": cmd_su3_flow, "darboux": cmd_darboux}
    try:
        cfg = _config(args, extra)
        return handlers[args.command](args, cfg)
    except (ConfigError, FileFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DarbouxLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
