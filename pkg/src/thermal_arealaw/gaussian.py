"""Free-fermion fast path through Majorana covariance matrices.

Majorana convention: ``g_{2j} = c_j + c_j^dag``, ``g_{2j+1} = i (c_j^dag - c_j)``.
A quadratic Hamiltonian is ``H = (i/4) sum_kl A_kl g_k g_l + constant`` with ``A``
real antisymmetric; a Gaussian state is fixed by ``Gamma_kl = (i/2) <[g_k, g_l]>``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError, UnsupportedModelError
from .lattice import Statistics, as_sites, majorana_operators
from .linalg import eigh, eigvalsh
from .potential import ModelSpec, Potential, coupling_norm

log = logging.getLogger(__name__)

QUADRATIC_TOL = 1e-10
ZERO_MODE_TOL = 1e-12
VALIDITY_TOL = 1e-10
MU_SHIFT = 1e-9


def _omega(n_sites: int) -> np.ndarray:
    """``g = Omega (c; c^dag)`` for the Majorana vector ``g``."""
    om = np.zeros((2 * n_sites, 2 * n_sites), dtype=complex)
    for j in range(n_sites):
        om[2 * j, j], om[2 * j, n_sites + j] = 1, 1
        om[2 * j + 1, j], om[2 * j + 1, n_sites + j] = -1j, 1j
    return om


@dataclass(frozen=True, eq=False)
class BdGHamiltonian:
    """``H = sum_ij hopping_ij c_i^dag c_j + 1/2 sum_ij (pairing_ij c_i^dag c_j^dag + h.c.) + const``.

    ``constant`` is the scalar of the Majorana form, so the many-body levels are
    ``constant + sum_k eps_k (n_k - 1/2)``.
    """

    hopping: np.ndarray
    pairing: np.ndarray
    constant: float = 0.0

    def __post_init__(self) -> None:
        h, d = np.asarray(self.hopping), np.asarray(self.pairing)
        if h.ndim != 2 or h.shape != d.shape or h.shape[0] != h.shape[1]:
            raise PreconditionError("hopping and pairing must be equal square matrices")
        if not np.allclose(h, h.conj().T, atol=1e-12):
            raise PreconditionError("hopping matrix is not Hermitian")
        if not np.allclose(d, -d.T, atol=1e-12):
            raise PreconditionError("pairing matrix is not antisymmetric")

    @property
    def n_sites(self) -> int:
        return self.hopping.shape[0]

    @property
    def bdg_matrix(self) -> np.ndarray:
        h, d = self.hopping, self.pairing
        return np.block([[h, d], [-d.conj(), -h.conj()]])

    @property
    def majorana_matrix(self) -> np.ndarray:
        om = _omega(self.n_sites)
        a = -0.5j * om @ self.bdg_matrix @ om.conj().T
        return np.ascontiguousarray(a.real)

    @classmethod
    def from_majorana(cls, a: np.ndarray, constant: float = 0.0) -> "BdGHamiltonian":
        a = np.asarray(a, dtype=float)
        if not np.allclose(a, -a.T, atol=1e-12):
            raise PreconditionError("Majorana matrix must be antisymmetric")
        n = a.shape[0] // 2
        om = _omega(n)
        hb = 0.5j * om.conj().T @ a @ om
        return cls(hb[:n, :n], hb[:n, n:], constant)

    def single_particle_energies(self) -> np.ndarray:
        """Non-negative quasiparticle energies ``eps_k``, ascending."""
        w = eigvalsh(1j * self.majorana_matrix)
        return np.sort(w[w.size // 2 :])

    def many_body_spectrum(self) -> np.ndarray:
        """All ``2^L`` levels, sorted; meant for small ``L``."""
        eps = self.single_particle_energies()
        occ = np.array(list(itertools.product((0, 1), repeat=eps.size)), dtype=float)
        return np.sort(self.constant + (occ - 0.5) @ eps)


@dataclass(frozen=True, eq=False)
class MajoranaCovariance:
    matrix: np.ndarray
    zero_modes: int = 0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DomainError("covariance must be a square matrix of even size")
        if not np.allclose(m, -m.T, atol=1e-12):
            raise DomainError("covariance is not antisymmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0] // 2

    def check(self, tol: float = VALIDITY_TOL) -> None:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        if s.size and s[0] > 1 + tol:
            raise DomainError(f"covariance has singular value {s[0]:.3g} > 1")

    def restrict(self, sites: Iterable[int]) -> np.ndarray:
        idx = [2 * s + k for s in as_sites(sites) for k in (0, 1)]
        if idx and (min(idx) < 0 or max(idx) >= self.matrix.shape[0]):
            raise PreconditionError(f"region {tuple(sites)} outside 0..{self.n_sites - 1}")
        return self.matrix[np.ix_(idx, idx)]


def bdg_from_potential(phi: Potential, n_sites: int) -> BdGHamiltonian:
    """Open-boundary quadratic form of ``H_{0..L-1}``, read off each term's Majorana expansion."""
    if phi.statistics is not Statistics.FERMION:
        raise UnsupportedModelError("Gaussian path needs a fermionic potential")
    a = np.zeros((2 * n_sites, 2 * n_sites))
    constant = 0.0
    cache: dict[int, list[np.ndarray]] = {}
    for x, term, _ in phi.placements(0, n_sites - 1):
        d = term.diameter + 1
        gam = cache.setdefault(d, majorana_operators(d))
        dim = 2**d
        m = term.matrix
        c0 = np.trace(m).real / dim
        rebuilt = c0 * np.eye(dim, dtype=complex)
        local = np.zeros((2 * d, 2 * d))
        for k in range(2 * d):
            for l in range(k + 1, 2 * d):
                pair = gam[k] @ gam[l]
                h_kl = np.trace(pair.conj().T @ m) / dim
                rebuilt += h_kl * pair
                local[k, l] = (-2j * h_kl).real
                local[l, k] = -local[k, l]
        if np.max(np.abs(rebuilt - m)) > QUADRATIC_TOL:
            raise UnsupportedModelError(f"term on {term.base} of {phi.name} is not quadratic")
        off = 2 * x
        a[off : off + 2 * d, off : off + 2 * d] += local
        constant += c0
    return BdGHamiltonian.from_majorana(a, constant)


def thermal_covariance(h: BdGHamiltonian, beta: float, zero_tol: float = ZERO_MODE_TOL) -> MajoranaCovariance:
    """``Gamma = i tanh(beta (iA) / 2)``; ``beta = inf`` uses the sign function.

    At ``beta = inf`` zero modes are left unfilled (the even mixture over the
    degenerate ground space) and counted in ``zero_modes``.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive or inf, got {beta}")
    w, v = eigh(1j * h.majorana_matrix)
    zero = 0
    if math.isinf(beta):
        zero = int(np.sum(np.abs(w) < zero_tol))
        f = np.where(np.abs(w) < zero_tol, 0.0, np.sign(w))
        if zero:
            log.warning("ground state has %d zero Majorana eigenvalues; degenerate", zero)
    else:
        f = np.tanh(beta * w / 2)
    gamma = 1j * ((v * f) @ v.conj().T)
    gamma = gamma.real
    return MajoranaCovariance(0.5 * (gamma - gamma.T), zero)


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    for q in (p, 1 - p):
        mask = q > 0
        out[mask] -= q[mask] * np.log(q[mask])
    return out


def gaussian_entropy(m: MajoranaCovariance, region: Iterable[int]) -> float:
    """``sum_j H2((1 + nu_j)/2)`` over the paired eigenvalues ``+-nu_j`` of ``i Gamma_A``."""
    sites = as_sites(region)
    if not sites:
        return 0.0
    sub = m.restrict(sites)
    lam = eigvalsh(1j * sub)
    if np.max(np.abs(lam)) > 1 + VALIDITY_TOL:
        raise DomainError(f"restricted covariance has eigenvalue {np.max(np.abs(lam)):.3g} > 1")
    return float(0.5 * np.sum(_binary_entropy((1 + lam) / 2)))


def gaussian_mutual(m: MajoranaCovariance, a: Iterable[int], b: Iterable[int]) -> float:
    a, b = as_sites(a), as_sites(b)
    if set(a) & set(b):
        raise PreconditionError(f"regions overlap: {a} and {b}")
    return gaussian_entropy(m, a) + gaussian_entropy(m, b) - gaussian_entropy(m, a + b)


def _with_mu_shift(spec: ModelSpec, shift: float) -> ModelSpec:
    params = spec.full_params()
    params["mu"] = params["mu"] + shift
    return ModelSpec(spec.name, params)


@dataclass
class ScanRow:
    beta: float
    n_sites: int
    mutual: float
    bound: float
    mu_shifted: bool


@dataclass
class ScanSeries:
    beta: float
    rows: list[ScanRow]
    tolerance: float

    @property
    def values(self) -> list[float]:
        return [r.mutual for r in self.rows]

    @property
    def differences(self) -> list[float]:
        v = self.values
        return [b - a for a, b in zip(v, v[1:])]

    @property
    def strictly_increasing(self) -> bool:
        return all(d > 0 for d in self.differences)

    def saturation_size(self) -> int | None:
        """Smallest ``L`` after which every successive difference is below the tolerance."""
        d = self.differences
        for i in range(len(d)):
            if all(abs(x) < self.tolerance for x in d[i:]):
                return self.rows[i].n_sites
        return None

    @property
    def saturated(self) -> bool:
        return self.saturation_size() is not None

    @property
    def bound(self) -> float:
        return self.rows[0].bound if self.rows else math.inf

    def label(self) -> str:
        if math.isinf(self.beta):
            if self.strictly_increasing and not self.saturated:
                return "growth trend along the ladder (surrogate for divergence, not a verified infinity)"
            return "saturating"
        return "saturated below bound" if self.saturated and max(self.values) <= self.bound else "not saturated"


@dataclass
class DestructionScan:
    model: str
    series: dict[float, ScanSeries] = field(default_factory=dict)

    def table(self) -> list[ScanRow]:
        return [r for s in self.series.values() for r in s.rows]


def halves_gaussian(spec: ModelSpec, beta: float, n_sites: int) -> tuple[float, bool]:
    """Half-half mutual information on ``0..L-1`` cut at ``L // 2``; shifts ``mu`` at zero modes."""
    h = bdg_from_potential(spec.potential(), n_sites)
    cov = thermal_covariance(h, beta)
    shifted = False
    if cov.zero_modes:
        shifted = True
        h = bdg_from_potential(_with_mu_shift(spec, MU_SHIFT).potential(), n_sites)
        cov = thermal_covariance(h, beta)
    half = n_sites // 2
    return gaussian_mutual(cov, range(half), range(half, n_sites)), shifted


def thermal_destruction_scan(
    spec: ModelSpec, betas: Sequence[float], sizes: Sequence[int], tolerance: float = 1e-3
) -> DestructionScan:
    """Half-half mutual information over ``(beta, L)``, compared with ``2 beta ||W_LR||``."""
    phi = spec.potential()
    w_norm = coupling_norm(phi)
    scan = DestructionScan(spec.label())
    for beta in betas:
        rows = []
        for n in sizes:
            mutual, shifted = halves_gaussian(spec, beta, n)
            rows.append(ScanRow(beta, n, mutual, 2 * beta * w_norm, shifted))
        scan.series[beta] = ScanSeries(beta, rows, tolerance)
    return scan
