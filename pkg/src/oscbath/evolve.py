"""Time-local master equations for the damped oscillator and their solution.

All three models are written in the interaction picture with respect to the
free oscillator.  ``FV`` keeps the position coupling with rotating
quadratures; ``FV_RWA`` and ``RW`` share the two-dissipator form and differ
only in which coefficient set feeds them.  The frequency shifts ``r`` are
tabulated but never enter a generator.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from . import superop as so
from .coeffs import CoefficientTable, RangeError

TRAJECTORY_HEADER = ("t", "n_mean", "var_x", "var_p", "cov_xp", "trace_err", "herm_err", "min_eig")


class ModelKind(enum.Enum):
    FV = "fv"
    FV_RWA = "fv_rwa"
    RW = "rw"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected one of fv, fv_rwa, rw") from None


class TruncationError(RuntimeError):
    """Population leaked into the top Fock levels."""


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class MomentState:
    mean_x: float = 0.0
    mean_p: float = 0.0
    sxx: float = 0.5
    spp: float = 0.5
    sxp: float = 0.0

    def __post_init__(self):
        if not (self.sxx > 0 and self.spp > 0):
            raise ValueError("variances must be positive")
        if self.sxx * self.spp - self.sxp ** 2 < 0.25 - 1e-12:
            raise ValueError("moments violate the uncertainty relation")

    @classmethod
    def vacuum(cls) -> "MomentState":
        return cls()


@dataclass
class Trajectory:
    times: np.ndarray
    n_mean: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    cov_xp: np.ndarray
    trace_err: np.ndarray
    herm_err: np.ndarray
    min_eig: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        cols = [getattr(self, name) if name != "t" else self.times for name in TRAJECTORY_HEADER]
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_HEADER)
            for row in zip(*cols):
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True, dtype=float))
        return cls(np.asarray(data["t"]), *(np.asarray(data[n]) for n in TRAJECTORY_HEADER[1:]))


def _rates(kind: ModelKind, coeffs: dict):
    if kind is ModelKind.RW:
        return coeffs["delta_rwa"], coeffs["gamma_rwa"]
    return coeffs["delta_fv"], coeffs["gamma_fv"]


def build_liouvillian(kind, table: CoefficientTable, t: float, dim: int, omega0: float = 1.0) -> np.ndarray:
    """Generator L(t) as an N^2 x N^2 matrix on column-major vec(rho)."""
    kind = ModelKind.parse(kind)
    if dim < 2:
        raise ValueError("Fock truncation must be at least 2")
    c = table.at(t)
    if kind is ModelKind.FV:
        Xt, Pt = so.rotate_quadratures(t, omega0, dim)
        XS = so.commutator_super(Xt)
        return -(c["delta_fv"] * XS @ XS
                 - c["pi_fv"] * XS @ so.commutator_super(Pt)
                 + 1j * c["gamma_fv"] * XS @ so.anticommutator_super(Pt))
    delta, gamma = _rates(kind, c)
    a = so.destroy(dim)
    return (delta + gamma) * so.dissipator_super(a) + (delta - gamma) * so.dissipator_super(a.conj().T)


class _Generator:
    """Applies L(t) to a density matrix with O(N^3) work."""

    def __init__(self, kind: ModelKind, table: CoefficientTable, dim: int, omega0: float):
        self.kind = kind
        self.table = table
        self.omega0 = omega0
        self.X, self.P = so.quadratures(dim)
        k = np.arange(dim, dtype=float)
        self.sqrt_k = np.sqrt(k[1:])
        self.n_diag = k  # a^dag a
        self.m_diag = np.append(k[1:], 0.0)  # a a^dag in the truncated space

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        c = self.table.at(t)
        if self.kind is ModelKind.FV:
            cs, sn = np.cos(self.omega0 * t), np.sin(self.omega0 * t)
            X = self.X * cs + self.P * sn
            P = self.P * cs - self.X * sn
            Xr, rX, Pr, rP = X @ rho, rho @ X, P @ rho, rho @ P
            inner = c["delta_fv"] * (Xr - rX) - c["pi_fv"] * (Pr - rP) + 1j * c["gamma_fv"] * (Pr + rP)
            return -(X @ inner - inner @ X)
        delta, gamma = _rates(self.kind, c)
        down, upw = float(delta + gamma), float(delta - gamma)
        s = self.sqrt_k
        out = np.zeros_like(rho)
        # a rho a^dag and a^dag rho a via index shifts
        out[:-1, :-1] += down * (s[:, None] * rho[1:, 1:] * s[None, :])
        out[1:, 1:] += upw * (s[:, None] * rho[:-1, :-1] * s[None, :])
        nd, md = self.n_diag, self.m_diag
        out -= 0.5 * down * (nd[:, None] * rho + rho * nd[None, :])
        out -= 0.5 * upw * (md[:, None] * rho + rho * md[None, :])
        return out


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dopri_step(f, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks) if a != 0)
        ks.append(f(t + _C[i] * h, yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0)
    err = h * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, ks) if b5 != b4)
    return y5, err, ks[-1]


def evolve_density(kind, table: CoefficientTable, rho0: np.ndarray, grid, rk_tol: float = 1e-9,
                   atol: float | None = None, tail_tol: float = 1e-8, omega0: float = 1.0,
                   max_step: float = np.inf) -> Trajectory:
    """Integrate d(rho)/dt = L(t) rho and record observables on ``grid``.

    Adaptive Dormand-Prince 5(4).  After every accepted step rho is made
    Hermitian and renormalized; the deviations removed by that correction
    are reported (maximum since the previous grid point) as ``trace_err``
    and ``herm_err``.
    """
    kind = ModelKind.parse(kind)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[0] < 0 or grid[-1] > table.t_max * (1 + 1e-12):
        raise RangeError("grid outside coefficient table range")
    rho = np.array(rho0, dtype=complex)
    so.check_density_matrix(rho)
    dim = rho.shape[0]
    if atol is None:
        atol = rk_tol * 1e-3
    f = _Generator(kind, table, dim, omega0)
    X, P = so.quadratures(dim)
    nop = np.arange(dim, dtype=float)

    n = grid.size
    rec = {k: np.zeros(n) for k in TRAJECTORY_HEADER[1:]}

    def record(i, rho, terr, herr):
        mx = np.trace(X @ rho).real
        mp = np.trace(P @ rho).real
        rec["n_mean"][i] = float(np.real(np.diag(rho)) @ nop)
        rec["var_x"][i] = np.trace(X @ X @ rho).real - mx ** 2
        rec["var_p"][i] = np.trace(P @ P @ rho).real - mp ** 2
        rec["cov_xp"][i] = 0.5 * np.trace((X @ P + P @ X) @ rho).real - mx * mp
        rec["trace_err"][i] = terr
        rec["herm_err"][i] = herr
        rec["min_eig"][i] = np.linalg.eigvalsh(rho)[0]
        tail = float(np.sum(np.real(np.diag(rho))[-2:]))
        if tail > tail_tol:
            raise TruncationError(
                f"population {tail:.3g} in the top two Fock levels at t={grid[i]:.6g} "
                f"exceeds tail_tol={tail_tol:g}; raise fock_dim above {dim}")

    t = grid[0]
    record(0, rho, 0.0, 0.0)
    k1 = f(t, rho)
    h = min(1e-3, grid[-1] - grid[0] if n > 1 else 1e-3, max_step)
    terr = herr = 0.0
    n_steps = n_rejected = 0
    for i in range(1, n):
        target = grid[i]
        while t < target:
            last = False
            if t + h >= target * (1 - 1e-15) or target - (t + h) < 1e-12 * max(1.0, target):
                h_try = target - t
                last = True
            else:
                h_try = h
            y5, err, k7 = _dopri_step(f, t, rho, h_try, k1)
            scale = atol + rk_tol * np.maximum(np.abs(rho), np.abs(y5))
            enorm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
            if enorm <= 1.0:
                t = target if last else t + h_try
                te = abs(np.trace(y5) - 1.0)
                he = float(np.max(np.abs(y5 - y5.conj().T)))
                terr, herr = max(terr, te), max(herr, he)
                rho = 0.5 * (y5 + y5.conj().T)
                rho /= np.trace(rho).real
                k1 = f(t, rho) if (te or he) else k7
                n_steps += 1
                fac = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
                if not last:
                    h = min(h_try * max(fac, 0.2), max_step)
            else:
                n_rejected += 1
                h = h_try * max(0.2, 0.9 * enorm ** -0.2)
        record(i, rho, terr, herr)
        terr = herr = 0.0

    meta = {"kind": kind.value, "path": "density", "dim": dim, "steps": n_steps, "rejected": n_rejected,
            "final_state": rho}
    return Trajectory(grid.copy(), **rec, meta=meta)


def _moment_rhs(kind: ModelKind, table: CoefficientTable):
    if kind is ModelKind.FV:
        # Schroedinger-frame moments; rotated into the interaction frame afterwards
        def rhs(t, y):
            c = table.at(t)
            d, g, p = c["delta_fv"], c["gamma_fv"], c["pi_fv"]
            mx, mp, sxx, spp, sxp = y
            return [mp, -mx - 2 * g * mp, 2 * sxp, -2 * sxp + 2 * d - 4 * g * spp,
                    spp - sxx + p - 2 * g * sxp]
    else:
        def rhs(t, y):
            d, g = _rates(kind, table.at(t))
            mx, mp, sxx, spp, sxp = y
            return [-g * mx, -g * mp, -2 * g * sxx + d, -2 * g * spp + d, -2 * g * sxp]
    return rhs


def evolve_moments(kind, table: CoefficientTable, m0: MomentState, grid, rk_tol: float = 1e-10,
                   omega0: float = 1.0) -> Trajectory:
    """Closed first- and second-moment equations of the quadratic generators.

    For FV_RWA and RW these give d<n>/dt = (Delta - gamma) - 2 gamma <n>.
    """
    kind = ModelKind.parse(kind)
    grid = np.asarray(grid, dtype=float)
    if grid[0] < 0 or grid[-1] > table.t_max * (1 + 1e-12):
        raise RangeError("grid outside coefficient table range")
    y0 = [m0.mean_x, m0.mean_p, m0.sxx, m0.spp, m0.sxp]
    if grid.size > 1:
        sol = solve_ivp(_moment_rhs(kind, table), (grid[0], grid[-1]), y0, method="DOP853",
                        t_eval=grid, rtol=rk_tol, atol=1e-15)
        if not sol.success:
            raise RuntimeError(sol.message)
        mx, mp, sxx, spp, sxp = sol.y
    else:
        mx, mp, sxx, spp, sxp = (np.array([v]) for v in y0)
    if kind is ModelKind.FV:
        cs, sn = np.cos(omega0 * grid), np.sin(omega0 * grid)
        mx, mp = mx * cs - mp * sn, mx * sn + mp * cs
        sxx, spp, sxp = (cs * cs * sxx - 2 * cs * sn * sxp + sn * sn * spp,
                         sn * sn * sxx + 2 * cs * sn * sxp + cs * cs * spp,
                         cs * sn * (sxx - spp) + (cs * cs - sn * sn) * sxp)
    n_mean = 0.5 * (sxx + spp - 1) + 0.5 * (mx ** 2 + mp ** 2)
    zeros = np.zeros_like(grid)
    return Trajectory(grid.copy(), n_mean, sxx, spp, sxp, zeros, zeros.copy(), np.full_like(grid, np.nan),
                      meta={"kind": kind.value, "path": "moments"})


@dataclass
class ComparisonReport:
    labels: tuple
    short_window: tuple
    long_window: tuple
    short_coeff: tuple
    short_ratio: float
    rate: tuple
    asymptote: tuple
    extras: dict = field(default_factory=dict)

    def to_text(self) -> str:
        a, b = self.labels
        lines = [
            f"model_a={a}",
            f"model_b={b}",
            f"short_window_start={self.short_window[0]!r}",
            f"short_window_end={self.short_window[1]!r}",
            f"short_quadratic_coeff_{a}={self.short_coeff[0]!r}",
            f"short_quadratic_coeff_{b}={self.short_coeff[1]!r}",
            f"short_ratio={self.short_ratio!r}",
            f"long_window_start={self.long_window[0]!r}",
            f"long_window_end={self.long_window[1]!r}",
            f"long_rate_{a}={self.rate[0]!r}",
            f"long_rate_{b}={self.rate[1]!r}",
            f"long_asymptote_{a}={self.asymptote[0]!r}",
            f"long_asymptote_{b}={self.asymptote[1]!r}",
        ]
        lines += [f"{k}={v!r}" for k, v in self.extras.items()]
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> dict:
        out = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                out[k] = v
        return out


def fit_quadratic(times, n_mean, window) -> float:
    """Least-squares c in n = c t^2 over the window."""
    t = np.asarray(times)
    sel = (t >= window[0] * (1 - 1e-12)) & (t <= window[1] * (1 + 1e-12))
    if sel.sum() < 8:
        raise FitError(f"short-time window {window} holds {sel.sum()} points; need at least 8")
    x = t[sel] ** 2
    return float(np.dot(x, np.asarray(n_mean)[sel]) / np.dot(x, x))


def fit_relaxation(times, n_mean, window):
    """Fit n(t) = n_inf - A exp(-rate t) over the window; return (rate, n_inf)."""
    t = np.asarray(times)
    y = np.asarray(n_mean)
    sel = (t >= window[0]) & (t <= window[1])
    if sel.sum() < 8:
        raise FitError(f"long-time window {window} holds {sel.sum()} points; need at least 8")
    ts, ys = t[sel], y[sel]
    if np.ptp(ys) == 0:
        return 0.0, float(ys[-1])
    t0 = ts[0]
    span = ts[-1] - t0
    n_inf0 = ys[-1] + 0.1 * abs(ys[-1] - ys[0]) + 1e-12
    amp0 = max(n_inf0 - ys[0], 1e-12)
    rate0 = max(np.log(max(n_inf0 - ys[0], 1e-15) / max(n_inf0 - ys[-1], 1e-15)) / span, 1e-6)

    def model(tt, n_inf, amp, rate):
        return n_inf - amp * np.exp(-rate * (tt - t0))

    try:
        popt, _ = curve_fit(model, ts, ys, p0=[n_inf0, amp0, rate0], maxfev=20000)
    except RuntimeError as exc:
        raise FitError(str(exc)) from exc
    return float(popt[2]), float(popt[0])


def heating_report(traj_a: Trajectory, traj_b: Trajectory, omega_c: float = 1.0,
                   labels=("fv", "rw"), short_window=None) -> ComparisonReport:
    """Compare two heating functions: short-time t^2 law and long-time relaxation.

    The short window defaults to [0.002, 0.02]/omega_c, the long window to
    the final third of the grid.
    """
    if traj_a.times.shape != traj_b.times.shape or not np.allclose(traj_a.times, traj_b.times, rtol=0, atol=0):
        raise ValueError("trajectories must share the same grid")
    t = traj_a.times
    sw = short_window or (0.002 / omega_c, 0.02 / omega_c)
    lw = (float(t[0] + 2 * (t[-1] - t[0]) / 3), float(t[-1]))
    ca = fit_quadratic(t, traj_a.n_mean, sw)
    cb = fit_quadratic(t, traj_b.n_mean, sw)
    ratio = ca / cb if cb != 0 else (np.inf if ca != 0 else 1.0)
    ra, na = fit_relaxation(t, traj_a.n_mean, lw)
    if traj_b.n_mean is traj_a.n_mean or np.array_equal(traj_a.n_mean, traj_b.n_mean):
        rb, nb = ra, na
    else:
        rb, nb = fit_relaxation(t, traj_b.n_mean, lw)
    return ComparisonReport(tuple(labels), tuple(map(float, sw)), lw, (float(ca), float(cb)), float(ratio),
                            (float(ra), float(rb)), (float(na), float(nb)))
