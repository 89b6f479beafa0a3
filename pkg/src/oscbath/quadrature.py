"""Panel quadrature for smooth and Fourier-type frequency integrals.

Each panel carries an n-point Gauss-Legendre rule. Plain integrals use the
rule directly. Fourier integrals ``int f(w) exp(i w t) dw`` project ``f`` on
each panel onto Legendre polynomials and integrate every polynomial against
the exponential exactly, using

    int_{-1}^{1} P_m(x) exp(i k x) dx = 2 i^m j_m(k)

with ``j_m`` the spherical Bessel function.  The error is set by how well a
degree n-1 polynomial represents ``f`` on a panel, not by ``t``, so large
times cost the same as small ones (a Filon-type rule).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from scipy.special import spherical_jn

_CHUNK = 128


@dataclass(frozen=True)
class Panels:
    """Composite Gauss-Legendre rule on a set of breakpoints."""

    breakpoints: np.ndarray
    n_nodes: int
    centers: np.ndarray
    half_widths: np.ndarray
    nodes: np.ndarray  # (n_panels, n_nodes) absolute abscissae
    weights: np.ndarray  # (n_panels, n_nodes) absolute weights
    projection: np.ndarray  # (n_nodes, n_nodes) values -> Legendre coefficients

    @classmethod
    def from_breakpoints(cls, breakpoints, n_nodes: int = 16) -> "Panels":
        b = np.unique(np.asarray(breakpoints, dtype=float))
        if b.size < 2:
            raise ValueError("need at least two distinct breakpoints")
        x, w = legendre.leggauss(n_nodes)
        centers = 0.5 * (b[1:] + b[:-1])
        half = 0.5 * (b[1:] - b[:-1])
        nodes = centers[:, None] + half[:, None] * x[None, :]
        weights = half[:, None] * w[None, :]
        # c_m = (2m+1)/2 sum_j w_j P_m(x_j) f(x_j), exact for degree < n
        vander = legendre.legvander(x, n_nodes - 1)  # (n_nodes, n_m)
        proj = (vander * w[:, None]).T * ((2 * np.arange(n_nodes) + 1) / 2)[:, None]
        return cls(b, n_nodes, centers, half, nodes, weights, proj)

    @property
    def n_panels(self) -> int:
        return self.centers.size

    @property
    def upper(self) -> float:
        return float(self.breakpoints[-1])

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Plain integral of node values of shape (..., n_panels, n_nodes)."""
        return np.einsum("...pj,pj->...", values, self.weights)

    def fourier(self, values: np.ndarray, t) -> np.ndarray:
        """Return ``int f(w) exp(i w t) dw`` for each ``t``.

        ``values`` holds f at the nodes, shape (..., n_panels, n_nodes).
        The result has shape (..., len(t)).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        coef = np.einsum("mj,...pj->...pm", self.projection, values)
        m = np.arange(self.n_nodes)
        phase_m = (1j) ** m
        out = np.empty(coef.shape[:-2] + (t.size,), dtype=complex)
        for start in range(0, t.size, _CHUNK):
            tc = t[start:start + _CHUNK]
            k = np.abs(tc[:, None] * self.half_widths[None, :])  # (T, P)
            sign = np.sign(tc)[:, None, None]
            # j_m(-k) = (-1)^m j_m(k)
            jm = np.stack([spherical_jn(mm, k) for mm in m], axis=-1)  # (T, P, M)
            jm = np.where((m % 2 == 1)[None, None, :], jm * sign, jm)
            kernel = 2.0 * jm * phase_m[None, None, :]
            kernel *= (self.half_widths[None, :] * np.exp(1j * tc[:, None] * self.centers[None, :]))[:, :, None]
            out[..., start:start + _CHUNK] = np.einsum("tpm,...pm->...t", kernel, coef)
        return out
