"""Command line: coeffs, evolve, compare, oracle and sweep."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import svg
from .coeffs import ConfigError, lindblad_window, tabulate
from .config import RunConfig, dump_config, load_config
from .evolve import FitError, TruncationError, fit_relaxation
from .runs import coefficient_table, run_compare, run_model, run_oracle

HYGIENE_TOL = 1e-10

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    updates = {
        "alpha": args.alpha,
        "theta": args.theta,
        "grid.t_max": args.t_max,
        "grid.n_points": args.n_points,
        "fock_dim": args.fock_dim,
        "out": args.out,
    }
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        updates[k] = _parse_value(v)
    return cfg.with_overrides(**updates)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.json")
    return out


def _hygiene_ok(traj) -> bool:
    return bool(np.all(traj.trace_err < HYGIENE_TOL) and np.all(traj.herm_err < HYGIENE_TOL))


def cmd_coeffs(cfg: RunConfig, plot: bool, jobs: int) -> int:
    out = _out_dir(cfg)
    # coefficients are reported on the configured output grid
    table = tabulate(cfg.bath(), cfg.omega0, cfg.output_grid(), n_nodes=cfg.quadrature.nodes, jobs=jobs)
    table.to_csv(out / "coeffs.csv")
    windows = lindblad_window(table)
    with (out / "lindblad.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_start", "t_end", "model", "is_lindblad"])
        for (t0, t1), model, ok in windows:
            w.writerow([repr(t0), repr(t1), model, str(ok).lower()])
    if plot:
        t = table.grid
        (out / "coeffs.svg").write_text(svg.figure([
            dict(series={"Delta FV": (t, table.delta_fv), "Delta RW": (t, table.delta_rwa)},
                 title="Diffusion coefficients", xlabel="t omega0", ylabel="Delta(t)"),
            dict(series={"gamma FV": (t, table.gamma_fv), "gamma RW": (t, table.gamma_rwa)},
                 title="Dissipation coefficients", xlabel="t omega0", ylabel="gamma(t)"),
        ]))
    return EXIT_OK


def _plot_heating(trajs: dict, path: Path, title: str) -> None:
    series = {k: (v.times, v.n_mean) for k, v in trajs.items()}
    panels = [dict(series=series, title=title, xlabel="t omega0", ylabel="<n>(t)")]
    path.write_text(svg.figure(panels))


def cmd_evolve(cfg: RunConfig, model: str, moments: bool, plot: bool, jobs: int) -> int:
    out = _out_dir(cfg)
    table = coefficient_table(cfg, jobs=jobs)
    traj = run_model(cfg, model, table, cfg.output_grid(), moments=moments)
    name = f"trajectory_{model}{'_moments' if moments else ''}"
    traj.to_csv(out / f"{name}.csv")
    if plot:
        _plot_heating({model: traj}, out / f"{name}.svg", f"Heating function ({model})")
    return EXIT_OK if _hygiene_ok(traj) else EXIT_INVARIANT


def cmd_oracle(cfg: RunConfig, model: str, plot: bool) -> int:
    out = _out_dir(cfg)
    traj = run_oracle(cfg, model, cfg.output_grid())
    traj.to_csv(out / f"oracle_{model}.csv")
    if plot:
        _plot_heating({f"oracle {model}": traj}, out / f"oracle_{model}.svg", f"Exact finite bath ({model})")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, with_oracle: bool, plot: bool, jobs: int) -> int:
    out = _out_dir(cfg)
    trajs, report, _ = run_compare(cfg, with_oracle=with_oracle, jobs=jobs)
    for name, traj in trajs.items():
        traj.to_csv(out / f"trajectory_{name}.csv")
    (out / "report.txt").write_text(report.to_text())
    if plot:
        series = {k: (v.times, v.n_mean) for k, v in trajs.items()}
        (out / "compare.svg").write_text(svg.figure([
            dict(series=series, title="Heating function", xlabel="t omega0", ylabel="<n>(t)"),
            dict(series=series, title="Short-time heating", xlabel="t omega0", ylabel="<n>(t)",
                 logx=True, logy=True),
        ]))
    ok = all(_hygiene_ok(t) for t in trajs.values())
    return EXIT_OK if ok else EXIT_INVARIANT


def _sweep_one(payload):
    cfg_data, model, moments, param, value, run_dir = payload
    try:
        cfg = RunConfig.model_validate(cfg_data)
        key = "spectral.omega_c" if param == "omega_c" else param
        cfg = cfg.with_overrides(**{key: value, "out": run_dir})
        out = _out_dir(cfg)
        table = coefficient_table(cfg)
        traj = run_model(cfg, model, table, cfg.output_grid(), moments=moments)
        path = out / f"trajectory_{model}{'_moments' if moments else ''}.csv"
        traj.to_csv(path)
        t = traj.times
        try:
            rate, n_inf = fit_relaxation(t, traj.n_mean, (t[0] + 2 * (t[-1] - t[0]) / 3, t[-1]))
        except FitError:
            rate = n_inf = float("nan")
        status = "ok" if _hygiene_ok(traj) else "invariant_failed"
        return dict(value=value, path=str(path), status=status, rate=rate, asymptote=n_inf, error="")
    except Exception as exc:  # recorded in the index, surfaced through the exit code
        return dict(value=value, path="", status="failed", rate=float("nan"), asymptote=float("nan"),
                    error=f"{type(exc).__name__}: {exc}")


def cmd_sweep(cfg: RunConfig, param: str, values, model: str, moments: bool, jobs: int) -> int:
    if param not in ("alpha", "theta", "omega_c"):
        raise ConfigError(f"sweep parameter must be alpha, theta or omega_c, not {param!r}")
    if not values or not all(np.isfinite(values)):
        raise ConfigError("sweep values must be finite and non-empty")
    out = _out_dir(cfg)
    payloads = [(cfg.model_dump(), model, moments, param, v, str(out / f"{param}_{v!r}")) for v in values]
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, payloads))
    else:
        results = [_sweep_one(p) for p in payloads]
    with (out / "index.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "path", "status", "rate", "asymptote", "error"])
        for r in results:
            w.writerow([repr(float(r["value"])), r["path"], r["status"], repr(r["rate"]), repr(r["asymptote"]),
                        r["error"]])
    return EXIT_OK if all(r["status"] == "ok" for r in results) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides config 'out')")
    common.add_argument("--plot", action="store_true", help="also write SVG plots")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker count")
    common.add_argument("--alpha", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--t-max", type=float, dest="t_max")
    common.add_argument("--n-points", type=int, dest="n_points")
    common.add_argument("--fock-dim", type=int, dest="fock_dim")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, dotted for nested keys (spectral.omega_c=2)")

    parser = argparse.ArgumentParser(prog="oscbath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="tabulate master-equation coefficients")
    p = sub.add_parser("evolve", parents=[common], help="integrate one master equation from the vacuum")
    p.add_argument("--model", choices=["fv", "fv_rwa", "rw"], default=None)
    p.add_argument("--moments", action="store_true", help="use the closed moment equations")
    p = sub.add_parser("compare", parents=[common], help="heating comparison report")
    p.add_argument("--with-oracle", action="store_true", help="also run the exact finite-bath oracles")
    p = sub.add_parser("oracle", parents=[common], help="exact finite-bath heating function")
    p.add_argument("--model", choices=["fv", "rw"], default="fv")
    p = sub.add_parser("sweep", parents=[common], help="repeat evolve over parameter values")
    p.add_argument("--param", required=True, choices=["alpha", "theta", "omega_c"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--model", choices=["fv", "fv_rwa", "rw"], default=None)
    p.add_argument("--moments", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        jobs = max(1, args.jobs)
        if args.command == "coeffs":
            return cmd_coeffs(cfg, args.plot, jobs)
        if args.command == "evolve":
            model = args.model or cfg.models[0]
            return cmd_evolve(cfg, model, args.moments or cfg.moments, args.plot, jobs)
        if args.command == "compare":
            return cmd_compare(cfg, args.with_oracle, args.plot, jobs)
        if args.command == "oracle":
            return cmd_oracle(cfg, args.model, args.plot)
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be numbers, got {args.values!r}") from None
            model = args.model or cfg.models[0]
            return cmd_sweep(cfg, args.param, values, model, args.moments or cfg.moments, jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, FitError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
