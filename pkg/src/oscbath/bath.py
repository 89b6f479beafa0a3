"""Reservoir models: spectral densities, thermal occupation and bath kernels.

Units are hbar = 1 with frequencies measured in units of the oscillator
frequency; the temperature enters as ``theta = k_B T / hbar``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quadrature import Panels

VARIANTS = ("drude", "drude_hard", "ohmic_exp")

# frequency extent used for the algebraically decaying Drude tail
_DRUDE_EXTENT = 1e10
# a kernel is flagged when the estimated tail exceeds this fraction of its value
_TAIL_REL = 1e-6


class DomainError(ValueError):
    """An argument lies outside the domain of a bath function."""


@dataclass(frozen=True)
class SpectralFamily:
    """Shape of |g(w)|^2.

    ``drude`` is (1/pi) wc^2 / (wc^2 + w^2); ``drude_hard`` is the same
    density set to zero above ``omega_max``; ``ohmic_exp`` is
    (1/pi) exp(-w/wc).
    """

    variant: str = "drude_hard"
    omega_c: float = 1.0
    omega_max: Optional[float] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown spectral variant {self.variant!r}")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if self.variant == "drude_hard" and self.omega_max is None:
            raise ValueError("drude_hard requires omega_max")
        if self.omega_max is not None and not self.omega_max > self.omega_c:
            raise ValueError("omega_max must exceed omega_c")

    @property
    def algebraic_tail(self) -> bool:
        """True when the density decays only as a power law."""
        return self.variant == "drude" and self.omega_max is None


@dataclass(frozen=True)
class BathSpec:
    alpha: float
    theta: float
    spectral: SpectralFamily

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.theta < 0:
            raise ValueError("theta must be non-negative")


@dataclass(frozen=True)
class KernelSample:
    """Bath kernels at one or more lags.

    ``kappa``/``mu`` are the correlation and susceptibility kernels of the
    position coupling; the ``*_rwa`` fields are their resonant counterparts
    for the excitation-preserving coupling.  ``log_divergent`` is set when
    the frequency integral has not converged (power-law tail at small lag).
    """

    tau: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray
    kappa_rwa: np.ndarray
    mu_r_rwa: np.ndarray
    mu_i_rwa: np.ndarray
    log_divergent: bool = False


def spectral_density(family: SpectralFamily, omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density requires omega >= 0")
    wc = family.omega_c
    if family.variant == "ohmic_exp":
        out = np.exp(-w / wc) / np.pi
    else:
        out = wc ** 2 / (wc ** 2 + w ** 2) / np.pi
    if family.omega_max is not None:
        out = np.where(w <= family.omega_max, out, 0.0)
    return out if out.ndim else float(out)


def thermal_occupation(theta: float, omega):
    """Bose-Einstein occupation 1/(exp(w/theta) - 1); zero at theta = 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("occupation requires omega >= 0")
    if theta == 0:
        out = np.zeros_like(w)
    else:
        if np.any(w == 0):
            raise DomainError("occupation diverges at omega = 0; use the weighted form")
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(w / theta)
    return out if out.ndim else float(out)


def weighted_occupation(theta: float, omega):
    """w (n(w) + 1/2), finite at w = 0 where it equals theta."""
    w = np.asarray(omega, dtype=float)
    if theta == 0:
        return 0.5 * w
    x = w / (2.0 * theta)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    big = 0.5 * w / np.tanh(safe)
    # x coth x = 1 + x^2/3 - x^4/45
    series = theta * (1.0 + x ** 2 / 3.0 - x ** 4 / 45.0)
    return np.where(small, series, big)


def diffusion_weight(spec: BathSpec, omega):
    """w |g(w)|^2 (n(w) + 1/2)."""
    return spectral_density(spec.spectral, omega) * weighted_occupation(spec.theta, omega)


def dissipation_weight(spec: BathSpec, omega):
    """w |g(w)|^2 / 2."""
    return 0.5 * np.asarray(omega, dtype=float) * spectral_density(spec.spectral, omega)


def band_edge(spec: BathSpec) -> float:
    """Upper limit of the frequency quadrature."""
    fam = spec.spectral
    if fam.omega_max is not None:
        return float(fam.omega_max)
    if fam.variant == "ohmic_exp":
        # envelope w exp(-w/wc) below 1e-12 of its peak
        return 45.0 * fam.omega_c
    return _DRUDE_EXTENT * max(fam.omega_c, 1.0)


def frequency_panels(spec: BathSpec, omega0: float = 1.0, n_nodes: int = 16) -> Panels:
    """Breakpoints resolving every analytic scale of the envelopes.

    A uniform region near the origin has panels no wider than half the
    nearest complex singularity (Drude pole at i*wc, Matsubara poles at
    2*pi*i*theta*k); beyond it panels grow geometrically.  ``omega0`` is
    always a breakpoint so resonant divided differences stay well
    conditioned.
    """
    fam = spec.spectral
    upper = band_edge(spec)
    scales = [fam.omega_c, omega0]
    if spec.theta > 0:
        scales.append(2 * np.pi * spec.theta)
    width = 0.5 * min(scales)
    linear_end = min(upper, 4.0 * max(fam.omega_c, omega0, spec.theta, width))
    n_lin = max(int(np.ceil(linear_end / width)), 4)
    pts = [np.linspace(0.0, linear_end, n_lin + 1)]
    if upper > linear_end:
        n_geo = int(np.ceil(np.log(upper / linear_end) / np.log(1.5)))
        pts.append(np.geomspace(linear_end, upper, n_geo + 1))
    if 0 < omega0 < upper:
        pts.append([omega0])
    return Panels.from_breakpoints(np.concatenate(pts), n_nodes)


def _tail_estimate(spec: BathSpec, weight, tau: np.ndarray, upper: float) -> np.ndarray:
    """Leading integration-by-parts term of int_W^inf f(w) e^{i w tau} dw."""
    if not spec.spectral.algebraic_tail:
        return np.zeros(tau.shape, dtype=complex)
    f_w = weight(spec, upper)
    return 1j * f_w * np.exp(1j * upper * tau) / tau


def kernels(spec: BathSpec, omega0: float, tau, n_nodes: int = 16) -> KernelSample:
    """Evaluate the bath kernels at lag(s) ``tau`` > 0."""
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau_arr <= 0):
        raise DomainError("kernels are evaluated at tau > 0")
    a2 = spec.alpha ** 2
    panels = frequency_panels(spec, omega0, n_nodes)
    w = panels.nodes
    env = np.stack([diffusion_weight(spec, w), dissipation_weight(spec, w)])
    four = panels.fourier(env, tau_arr)
    tails = np.stack([
        _tail_estimate(spec, diffusion_weight, tau_arr, panels.upper),
        _tail_estimate(spec, dissipation_weight, tau_arr, panels.upper),
    ])
    four = four + tails
    fd, fg = four
    rot = np.exp(-1j * omega0 * tau_arr)
    kappa = 2 * a2 * fd.real
    mu = 2 * a2 * fg.imag
    divergent = bool(np.any(np.abs(tails) > _TAIL_REL * (np.abs(four) + 1e-300)))

    def shape(x):
        return x if np.ndim(tau) else float(x[0])

    return KernelSample(
        tau=shape(tau_arr),
        kappa=shape(kappa),
        mu=shape(mu),
        kappa_rwa=shape(a2 * (rot * fd).real),
        mu_r_rwa=shape(a2 * (rot * fg).real),
        mu_i_rwa=shape(a2 * (rot * fg).imag),
        log_divergent=divergent,
    )
