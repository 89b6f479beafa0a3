"""High-level runs shared by the command line and the tests."""
from __future__ import annotations

import numpy as np

from . import superop as so
from .coeffs import CoefficientTable, default_table_grid, tabulate
from .config import RunConfig
from .evolve import (ComparisonReport, ModelKind, MomentState, Trajectory, evolve_density,
                     evolve_moments, heating_report)
from .oracle import discretize, exact_evolution

SHORT_FIT = (0.002, 0.02)  # in units of 1/omega_c
EXPONENT_FIT = (1e-3, 1e-2)


def short_time_points(omega_c: float, n: int = 19) -> np.ndarray:
    return np.linspace(SHORT_FIT[0], SHORT_FIT[1], n) / omega_c


def coefficient_table(cfg: RunConfig, t_max: float | None = None, extra=(), jobs: int = 1) -> CoefficientTable:
    t_max = cfg.grid.t_max if t_max is None else t_max
    grid = default_table_grid(t_max, dt=cfg.quadrature.table_dt, extra=extra)
    return tabulate(cfg.bath(), cfg.omega0, grid, n_nodes=cfg.quadrature.nodes, jobs=jobs)


def run_model(cfg: RunConfig, model, table: CoefficientTable, grid, moments: bool | None = None) -> Trajectory:
    kind = ModelKind.parse(model)
    moments = cfg.moments if moments is None else moments
    if moments:
        return evolve_moments(kind, table, MomentState.vacuum(), grid, omega0=cfg.omega0)
    rho0 = so.fock_state(0, cfg.resolved_fock_dim())
    return evolve_density(kind, table, rho0, grid, rk_tol=cfg.rk_tol, tail_tol=cfg.tail_tol, omega0=cfg.omega0)


def run_oracle(cfg: RunConfig, model, grid) -> Trajectory:
    bath = discretize(cfg.bath(), cfg.oracle.n_modes, band=(0.0, cfg.oracle.omega_max), t_window=float(grid[-1]))
    return exact_evolution(model, bath, cfg.alpha, cfg.omega0, grid)


def exponent_fits(table_cfg: RunConfig, n: int = 20) -> dict:
    """Log-log slopes of Delta and gamma for both couplings over [1e-3, 1e-2]/omega_c."""
    wc = table_cfg.spectral.omega_c
    t = np.geomspace(EXPONENT_FIT[0], EXPONENT_FIT[1], n) / wc
    tab = tabulate(table_cfg.bath(), table_cfg.omega0, np.concatenate([[0.0], t]),
                   n_nodes=table_cfg.quadrature.nodes)
    out = {}
    for name in ("gamma_fv", "gamma_rwa", "delta_fv", "delta_rwa"):
        y = getattr(tab, name)[1:]
        out[f"exponent_{name}"] = float(np.polyfit(np.log(t), np.log(y), 1)[0]) if np.all(y > 0) else float("nan")
    return out


def compare_grid(cfg: RunConfig) -> np.ndarray:
    return np.unique(np.concatenate([cfg.output_grid(), short_time_points(cfg.spectral.omega_c)]))


def run_compare(cfg: RunConfig, with_oracle: bool = False, jobs: int = 1):
    """Run the configured models and build the heating comparison."""
    grid = compare_grid(cfg)
    table = coefficient_table(cfg, extra=short_time_points(cfg.spectral.omega_c), jobs=jobs)
    models = list(cfg.models)
    if len(models) == 1:
        models = models * 2
    trajs = {}
    for m in dict.fromkeys(models):
        trajs[m] = run_model(cfg, m, table, grid)
    a, b = models[0], models[1]
    report = heating_report(trajs[a], trajs[b], omega_c=cfg.spectral.omega_c, labels=(a, b))
    report.extras.update(exponent_fits(cfg))
    for m in dict.fromkeys(models):
        report.extras[f"r_final_{m}"] = float(table.r_rwa[-1] if m == "rw" else table.r_fv[-1])
    if with_oracle:
        for m in ("fv", "rw"):
            ex = run_oracle(cfg, m, grid)
            trajs[f"oracle_{m}"] = ex
            if m in trajs:
                dev = np.max(np.abs(trajs[m].n_mean - ex.n_mean)) / max(np.max(np.abs(ex.n_mean)), 1e-300)
                report.extras[f"oracle_deviation_{m}"] = float(dev)
    return trajs, report, table
