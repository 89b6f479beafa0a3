"""Exact reference dynamics for a finite bath.

The oscillator plus N discretized reservoir modes form a closed quadratic
system, so the covariance matrix evolves by a symplectic similarity
transform and no weak-coupling approximation is involved.  Quadratures are
ordered (x0, p0, x1, p1, ...), system first, and H = z^T M z / 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .bath import BathSpec, spectral_density, thermal_occupation, weighted_occupation
from .evolve import ModelKind, Trajectory


class RecurrenceError(ValueError):
    """Requested window reaches the recurrence time of the discrete bath."""


@dataclass(frozen=True)
class OracleBath:
    omegas: np.ndarray
    weights: np.ndarray  # g_i, with g_i^2 = |g(w_i)|^2 dw
    theta: float
    band: tuple

    @property
    def spacing(self) -> float:
        return (self.band[1] - self.band[0]) / self.omegas.size

    @property
    def recurrence_time(self) -> float:
        return 2 * np.pi / self.spacing

    def occupations(self) -> np.ndarray:
        return thermal_occupation(self.theta, self.omegas)

    def kappa(self, alpha: float, tau) -> np.ndarray:
        """Correlation kernel of the discrete bath (cosine sum over modes)."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        amp = 2 * alpha ** 2 * self.weights ** 2 * weighted_occupation(self.theta, self.omegas)
        return np.cos(np.outer(tau, self.omegas)) @ amp


def discretize(spec: BathSpec, n_modes: int, band=None, t_window: float | None = None,
               density=None) -> OracleBath:
    """Midpoint discretization of the reservoir over ``band``.

    ``density`` overrides the spectral family with any callable |g(w)|^2.
    """
    if n_modes < 2:
        raise ValueError("need at least two modes")
    if band is None:
        upper = spec.spectral.omega_max if spec.spectral.omega_max is not None else 10.0
        band = (0.0, float(upper))
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo >= 0:
        raise ValueError("band must satisfy 0 <= lo < hi")
    dw = (hi - lo) / n_modes
    omegas = lo + dw * (np.arange(n_modes) + 0.5)
    dens = density(omegas) if density is not None else spectral_density(spec.spectral, omegas)
    bath = OracleBath(omegas, np.sqrt(np.asarray(dens, dtype=float) * dw), spec.theta, (lo, hi))
    if t_window is not None and t_window >= bath.recurrence_time:
        raise RecurrenceError(
            f"window {t_window:g} reaches the recurrence time {bath.recurrence_time:g}; add modes")
    return bath


def hamiltonian_matrix(kind, bath: OracleBath, alpha: float, omega0: float = 1.0) -> np.ndarray:
    kind = ModelKind.parse(kind)
    n = bath.omegas.size
    M = np.zeros((2 * (n + 1), 2 * (n + 1)))
    M[0, 0] = M[1, 1] = omega0
    xi = 2 + 2 * np.arange(n)
    M[xi, xi] = M[xi + 1, xi + 1] = bath.omegas
    if kind is ModelKind.FV:
        # alpha X sum sqrt(w_i) g_i (b_i + b_i^dag) = alpha X sum sqrt(2 w_i) g_i x_i
        c = alpha * np.sqrt(2 * bath.omegas) * bath.weights
        M[0, xi] = M[xi, 0] = c
    elif kind is ModelKind.RW:
        # alpha sum sqrt(w_i/2) g_i (a b_i^dag + h.c.) = ... (X x_i + P p_i)
        c = alpha * np.sqrt(bath.omegas / 2) * bath.weights
        M[0, xi] = M[xi, 0] = c
        M[1, xi + 1] = M[xi + 1, 1] = c
    else:
        raise ValueError("the exact oracle covers the fv and rw couplings only")
    return M


def symplectic_form(n_pairs: int) -> np.ndarray:
    return np.kron(np.eye(n_pairs), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def initial_covariance(bath: OracleBath) -> np.ndarray:
    """System vacuum times bath thermal state, (2n+1)/2 on each quadrature."""
    diag = np.concatenate([[0.5, 0.5], np.repeat(bath.occupations() + 0.5, 2)])
    return np.diag(diag)


def is_physical(cov: np.ndarray, tol: float = 1e-12) -> bool:
    omega = symplectic_form(cov.shape[0] // 2)
    return bool(np.linalg.eigvalsh(cov + 0.5j * omega)[0] >= -tol)


def propagator(kind, bath: OracleBath, alpha: float, dt: float, omega0: float = 1.0) -> np.ndarray:
    M = hamiltonian_matrix(kind, bath, alpha, omega0)
    return expm(symplectic_form(M.shape[0] // 2) @ M * dt)


def exact_evolution(kind, bath: OracleBath, alpha: float, omega0: float, grid) -> Trajectory:
    """System heating function of the closed oscillator-plus-bath system.

    Variances are reported in the frame co-rotating with the free
    oscillator, matching the master-equation trajectories.
    """
    kind = ModelKind.parse(kind)
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must start at 0 and increase strictly")
    if grid[-1] >= bath.recurrence_time:
        raise RecurrenceError(
            f"grid end {grid[-1]:g} reaches the recurrence time {bath.recurrence_time:g}")
    V0 = initial_covariance(bath)
    if not is_physical(V0):
        raise ValueError("initial covariance is not physical")
    if alpha == 0:
        # decoupled: the vacuum is stationary under the free rotation
        half = np.full_like(grid, 0.5)
        zeros = np.zeros_like(grid)
        return Trajectory(grid.copy(), zeros, half, half.copy(), zeros.copy(), zeros.copy(), zeros.copy(),
                          np.full_like(grid, np.nan),
                          meta={"kind": kind.value, "path": "oracle", "n_modes": bath.omegas.size})
    d0 = np.diag(V0)
    A = symplectic_form(V0.shape[0] // 2) @ hamiltonian_matrix(kind, bath, alpha, omega0)

    # only the system rows of S(t) are needed: V_sys = S_rows diag(V0) S_rows^T
    cache = {}
    rows = np.eye(V0.shape[0])[:2]
    sxx, spp, sxp = (np.empty(grid.size) for _ in range(3))
    for i, t in enumerate(grid):
        if i:
            dt = round(t - grid[i - 1], 12)
            if dt not in cache:
                cache[dt] = expm(A * dt)
            rows = rows @ cache[dt]
        v = (rows * d0) @ rows.T
        sxx[i], spp[i], sxp[i] = v[0, 0], v[1, 1], v[0, 1]
    n_mean = 0.5 * (sxx + spp - 1)
    cs, sn = np.cos(omega0 * grid), np.sin(omega0 * grid)
    var_x = cs * cs * sxx - 2 * cs * sn * sxp + sn * sn * spp
    var_p = sn * sn * sxx + 2 * cs * sn * sxp + cs * cs * spp
    cov_xp = cs * sn * (sxx - spp) + (cs * cs - sn * sn) * sxp
    zeros = np.zeros_like(grid)
    return Trajectory(grid.copy(), n_mean, var_x, var_p, cov_xp, zeros, zeros.copy(),
                      np.full_like(grid, np.nan),
                      meta={"kind": kind.value, "path": "oracle", "n_modes": bath.omegas.size})
