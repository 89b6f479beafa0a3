"""Operator algebra on the truncated oscillator Fock space.

Density matrices are vectorized column-major (``rho.reshape(-1, order="F")``),
so ``vec(A rho B) = kron(B.T, A) @ vec(rho)``.  Operators and superoperators
are plain complex ndarrays.
"""
from __future__ import annotations

import numpy as np


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator with <k|a|k+1> = sqrt(k+1)."""
    if dim < 2:
        raise ValueError("Fock truncation must be at least 2")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def quadratures(dim: int):
    """X = (a + a^dag)/sqrt(2) and P = i(a^dag - a)/sqrt(2)."""
    a = destroy(dim)
    ad = a.conj().T
    return (a + ad) / np.sqrt(2), 1j * (ad - a) / np.sqrt(2)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def left(A: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(A.shape[0]), A)


def right(A: np.ndarray) -> np.ndarray:
    return np.kron(A.T, np.eye(A.shape[0]))


def commutator_super(A: np.ndarray) -> np.ndarray:
    """rho -> A rho - rho A."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("operator must be square")
    return left(A) - right(A)


def anticommutator_super(A: np.ndarray) -> np.ndarray:
    """rho -> A rho + rho A."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("operator must be square")
    return left(A) + right(A)


def rotate_quadratures(t: float, omega0: float = 1.0, dim: int = 40):
    """Free-evolution images X(t) = X cos + P sin, P(t) = P cos - X sin."""
    X, P = quadratures(dim)
    c, s = np.cos(omega0 * t), np.sin(omega0 * t)
    return X * c + P * s, P * c - X * s


def dissipator_super(L: np.ndarray) -> np.ndarray:
    """rho -> L rho L^dag - {L^dag L, rho}/2."""
    Ld = L.conj().T
    LdL = Ld @ L
    return np.kron(L.conj(), L) - 0.5 * (left(LdL) + right(LdL))


def fock_state(n: int, dim: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def thermal_state(nbar: float, dim: int) -> np.ndarray:
    """Truncated and renormalized thermal state of mean occupation ``nbar``."""
    if nbar == 0:
        return fock_state(0, dim)
    p = (nbar / (1 + nbar)) ** np.arange(dim)
    return np.diag(p / p.sum()).astype(complex)


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12) -> float:
    """Validate Hermiticity and unit trace; return the minimum eigenvalue."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
        raise ValueError("density matrix must be square with dim >= 2")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix trace differs from 1")
    return float(np.linalg.eigvalsh(rho)[0])
