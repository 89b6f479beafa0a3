"""Time-dependent master-equation coefficients.

Every coefficient is a double integral over lag and frequency.  The lag
integral of a product of trigonometric functions is elementary, so it is
done first, leaving one frequency integral of an envelope times

    S(x) = sin(x t) / x        or        C(x) = (1 - cos(x t)) / x

with x = w -/+ w0.  The resonant pieces S(w - w0), C(w - w0) are split as
f(w) = f(w0) + (w - w0) q(w): the constant part integrates to sine and
cosine integrals, the smooth remainder q goes through the Fourier panel rule.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.special import sici

from .bath import (BathSpec, DomainError, diffusion_weight, dissipation_weight,
                   frequency_panels, kernels)

COLUMNS = ("delta_fv", "gamma_fv", "pi_fv", "r_fv", "delta_rwa", "gamma_rwa", "r_rwa")
CSV_HEADER = ("t",) + COLUMNS

# below this value of t * (frequency extent) a power-law tail is not resolved
_MIN_EXTENT_TIMES_T = 1e4


class QuadratureDivergence(ArithmeticError):
    """The frequency integral did not converge (power-law tail at tiny t)."""


class ConfigError(ValueError):
    pass


class RangeError(ValueError):
    pass


def _cin(z):
    """Cin(z) = int_0^z (1 - cos u)/u du for z >= 0."""
    z = np.asarray(z, dtype=float)
    small = z < 0.5
    zs = np.where(small, z, 1.0)
    z2 = zs * zs
    # alternating series, 8 terms exhaust double precision for z < 0.5
    term = z2 / 2.0
    series = term / 2.0
    for k in range(2, 9):
        term = -term * z2 / ((2 * k - 1) * (2 * k))
        series = series + term / (2 * k)
    zl = np.where(small, 1.0, z)
    _, ci = sici(zl)
    large = np.euler_gamma + np.log(zl) - ci
    return np.where(small, series, large)


def _resonant_split(weight_values, weight_at_w0, nodes, omega0):
    return (weight_values - weight_at_w0) / (nodes - omega0)


def _coefficient_arrays(spec: BathSpec, omega0: float, t, n_nodes: int = 16) -> dict:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("coefficients require t >= 0")
    panels = frequency_panels(spec, omega0, n_nodes)
    upper = panels.upper
    if spec.spectral.algebraic_tail and np.any((t > 0) & (t * upper < _MIN_EXTENT_TIMES_T)):
        raise QuadratureDivergence(
            "log-divergent regime: power-law tail not resolved at this t")
    w = panels.nodes
    wd = diffusion_weight(spec, w)
    wg = dissipation_weight(spec, w)
    if omega0 < upper:
        wd0 = float(diffusion_weight(spec, omega0))
        wg0 = float(dissipation_weight(spec, omega0))
    else:
        wd0 = wg0 = 0.0
    env = np.stack([
        _resonant_split(wd, wd0, w, omega0),
        _resonant_split(wg, wg0, w, omega0),
        wd / (w + omega0),
        wg / (w + omega0),
    ])
    plain = panels.integrate(env)  # (4,)
    four = panels.fourier(env, t)  # (4, T)
    down = np.exp(-1j * omega0 * t)
    up = np.exp(1j * omega0 * t)

    lo, hi = omega0, upper - omega0
    si_lo = sici(lo * t)[0]
    si_hi = sici(hi * t)[0]
    sin_int = si_hi + si_lo
    cos_int = _cin(abs(hi) * t) - _cin(lo * t)

    s_minus = (down * four[:2]).imag + np.array([wd0, wg0])[:, None] * sin_int
    c_minus = plain[:2, None] - (down * four[:2]).real + np.array([wd0, wg0])[:, None] * cos_int
    s_plus = (up * four[2:]).imag
    c_plus = plain[2:, None] - (up * four[2:]).real

    a2 = spec.alpha ** 2
    out = {
        "delta_rwa": a2 * s_minus[0],
        "delta_fv": a2 * (s_minus[0] + s_plus[0]),
        "gamma_rwa": a2 * s_minus[1],
        "gamma_fv": a2 * (s_minus[1] - s_plus[1]),
        "pi_fv": a2 * (c_plus[0] - c_minus[0]),
        "r_rwa": 2 * a2 * c_minus[1],
        "r_fv": 2 * a2 * (c_plus[1] + c_minus[1]),
    }
    zero = t == 0
    for v in out.values():
        v[zero] = 0.0
    return out


def fv_coefficients(spec: BathSpec, omega0: float, t, n_nodes: int = 16):
    """Return (delta, gamma, pi, r) for the position coupling at time(s) t."""
    c = _coefficient_arrays(spec, omega0, t, n_nodes)
    keys = ("delta_fv", "gamma_fv", "pi_fv", "r_fv")
    return tuple(c[k] if np.ndim(t) else float(c[k][0]) for k in keys)


def rwa_coefficients(spec: BathSpec, omega0: float, t, n_nodes: int = 16):
    """Return (delta_rwa, gamma_rwa, r_rwa) for the rotating-wave coupling."""
    c = _coefficient_arrays(spec, omega0, t, n_nodes)
    keys = ("delta_rwa", "gamma_rwa", "r_rwa")
    return tuple(c[k] if np.ndim(t) else float(c[k][0]) for k in keys)


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients tabulated on a time grid, with cubic lookup.

    When ``slopes`` (exact time derivatives per column) are given the lookup
    is a cubic Hermite spline through values and slopes; otherwise it is
    the monotone PCHIP spline.
    """

    grid: np.ndarray
    delta_fv: np.ndarray
    gamma_fv: np.ndarray
    pi_fv: np.ndarray
    r_fv: np.ndarray
    delta_rwa: np.ndarray
    gamma_rwa: np.ndarray
    r_rwa: np.ndarray
    meta: dict = field(default_factory=dict)
    slopes: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in COLUMNS:
            arr = getattr(self, name)
            if arr.shape != self.grid.shape:
                raise ConfigError(f"column {name} does not match the grid")
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"column {name} has non-finite values")
        values = np.stack([getattr(self, c) for c in COLUMNS], axis=-1)
        if self.grid.size > 1 and self.slopes is not None:
            interp = CubicHermiteSpline(self.grid, values, np.stack([self.slopes[c] for c in COLUMNS], axis=-1))
        elif self.grid.size > 1:
            interp = PchipInterpolator(self.grid, values)
        else:
            interp = None
        object.__setattr__(self, "_interp", interp)

    @property
    def t_max(self) -> float:
        return float(self.grid[-1])

    def at(self, t) -> dict:
        """Interpolated coefficients at time(s) t inside the grid."""
        tt = np.asarray(t, dtype=float)
        if np.any(tt < self.grid[0]) or np.any(tt > self.grid[-1] * (1 + 1e-12)):
            raise RangeError(f"t outside coefficient table [0, {self.grid[-1]}]")
        if self._interp is None:
            vals = np.stack([getattr(self, c) for c in COLUMNS], axis=-1)[0]
            vals = np.broadcast_to(vals, tt.shape + (len(COLUMNS),))
        else:
            vals = self._interp(np.minimum(tt, self.grid[-1]))
        return {c: vals[..., i] for i, c in enumerate(COLUMNS)}

    def rows(self):
        cols = [self.grid] + [getattr(self, c) for c in COLUMNS]
        return zip(*cols)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in self.rows():
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, meta=None) -> "CoefficientTable":
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
        data = np.atleast_1d(data)
        return cls(np.asarray(data["t"]), **{c: np.asarray(data[c]) for c in COLUMNS}, meta=meta or {})


def tabulate(spec: BathSpec, omega0: float, grid, n_nodes: int = 16, jobs: int = 1) -> CoefficientTable:
    """Evaluate both coefficient sets on a grid starting at 0."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("grid must be a non-empty 1-d sequence")
    if grid[0] != 0:
        raise ConfigError("grid must start at t = 0")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be strictly increasing")
    if jobs > 1 and grid.size > 1:
        chunks = np.array_split(grid, jobs)
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(lambda g: _coefficient_arrays(spec, omega0, g, n_nodes), chunks))
        cols = {c: np.concatenate([p[c] for p in parts]) for c in COLUMNS}
    else:
        cols = _coefficient_arrays(spec, omega0, grid, n_nodes)
    meta = {"spec": spec, "omega0": omega0, "n_nodes": n_nodes}
    return CoefficientTable(grid, **cols, meta=meta, slopes=_slopes(spec, omega0, grid, cols, n_nodes))


def _slopes(spec: BathSpec, omega0: float, grid: np.ndarray, cols: dict, n_nodes: int) -> dict | None:
    """Exact derivatives d/dt of every column: the kernels times the rotating factors."""
    if grid.size < 2:
        return None
    pos = grid > 0
    k = kernels(spec, omega0, grid[pos], n_nodes)
    c, s = np.cos(omega0 * grid[pos]), np.sin(omega0 * grid[pos])
    inner = {
        "delta_fv": k.kappa * c, "gamma_fv": k.mu * s, "pi_fv": k.kappa * s, "r_fv": 2 * k.mu * c,
        "delta_rwa": k.kappa_rwa, "gamma_rwa": k.mu_r_rwa, "r_rwa": 2 * k.mu_i_rwa,
    }
    out = {}
    for name, d in inner.items():
        full = np.empty_like(grid)
        full[pos] = d
        if not pos.all():
            # the kernel can be unbounded at zero lag (algebraic tails); use the first secant
            full[~pos] = (cols[name][1] - cols[name][0]) / (grid[1] - grid[0])
        out[name] = full
    return out


def default_table_grid(t_max: float, dt: float = 0.02, t_min: float = 1e-4, n_log: int = 60,
                       extra=()) -> np.ndarray:
    """Uniform grid to ``t_max`` plus a logarithmic cluster resolving t -> 0."""
    n = max(int(np.ceil(t_max / dt)), 1)
    parts = [np.linspace(0.0, t_max, n + 1)]
    if t_max > t_min:
        parts.append(np.geomspace(t_min, min(dt, t_max), n_log))
    parts.append(np.asarray(extra, dtype=float))
    g = np.unique(np.concatenate(parts))
    return g[(g >= 0) & (g <= t_max)]


def lindblad_window(table: CoefficientTable):
    """Split the table range into intervals where each dissipative model is
    of Lindblad form (both Delta + gamma and Delta - gamma non-negative).

    Returns a list of ``((t_start, t_end), model, is_lindblad)`` with model
    ``"FV_RWA"`` or ``"RW"``.  Sign changes are located by linear
    interpolation; a zero counts as Lindblad.
    """
    out = []
    g = table.grid
    for model, d, gm in (("FV_RWA", table.delta_fv, table.gamma_fv),
                         ("RW", table.delta_rwa, table.gamma_rwa)):
        worst = np.minimum(d + gm, d - gm)
        ok = worst >= 0
        if g.size == 1:
            out.append(((float(g[0]), float(g[0])), model, bool(ok[0])))
            continue
        start = float(g[0])
        for k in range(1, g.size):
            if ok[k] != ok[k - 1]:
                y0, y1 = worst[k - 1], worst[k]
                cross = float(g[k - 1] + (g[k] - g[k - 1]) * (0 - y0) / (y1 - y0))
                out.append(((start, cross), model, bool(ok[k - 1])))
                start = cross
        out.append(((start, float(g[-1])), model, bool(ok[-1])))
    return out
