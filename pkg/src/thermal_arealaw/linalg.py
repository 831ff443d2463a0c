"""Dense Hermitian matrix functions used throughout the exact-diagonalization path."""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

LOG_FLOOR = 1e-300


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def _real_view(m: np.ndarray) -> np.ndarray | None:
    if not np.iscomplexobj(m):
        return m
    if not np.any(m.imag):
        return np.ascontiguousarray(m.real)
    return None


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition, on the real-symmetric LAPACK path when ``m`` is real."""
    h = hermitize(m)
    r = _real_view(h)
    if r is not None:
        return scipy.linalg.eigh(r, driver="evd", check_finite=False)
    return scipy.linalg.eigh(h, driver="evr", check_finite=False)


def eigvalsh(m: np.ndarray) -> np.ndarray:
    h = hermitize(m)
    r = _real_view(h)
    return scipy.linalg.eigh(h if r is None else r, eigvals_only=True, check_finite=False)


def funm_herm(m: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigendecomposition."""
    w, v = eigh(m)
    return (v * f(w)) @ v.conj().T


def expm_herm(m: np.ndarray) -> np.ndarray:
    return funm_herm(m, np.exp)


def logm_psd(m: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a positive semidefinite matrix, eigenvalues floored at 1e-300."""
    return funm_herm(m, lambda w: np.log(np.maximum(w, LOG_FLOOR)))


def normalized_exp(m: np.ndarray) -> np.ndarray:
    """Return ``exp(m) / Tr exp(m)`` for Hermitian ``m`` with a max-eigenvalue shift."""
    w, v = eigh(m)
    p = np.exp(w - w.max())
    p /= p.sum()
    return (v * p) @ v.conj().T


def entropy_of_spectrum(p: np.ndarray) -> float:
    """Shannon entropy in nats with ``0 log 0 = 0``; tiny negative eigenvalues are dropped."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    r = _real_view(m)
    return float(np.linalg.svd(m if r is None else r, compute_uv=False).sum())


def operator_norm(m: np.ndarray) -> float:
    """Spectral norm; uses the eigenvalue of maximal modulus when ``m`` is Hermitian."""
    if m.size == 0:
        return 0.0
    if np.allclose(m, m.conj().T, atol=1e-13):
        return float(np.max(np.abs(eigvalsh(m))))
    return float(np.linalg.svd(m, compute_uv=False)[0])


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    d = g @ g.conj().T
    return d / np.trace(d).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = hermitize(g)
    if norm is not None:
        h *= norm / operator_norm(h)
    return h
