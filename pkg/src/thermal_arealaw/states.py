"""Density-matrix states on windows and their subregions.

A state is stored in the canonical representation of its site set: the sites in
ascending order, Kronecker-ordered, with Jordan-Wigner modes for fermions. A
reduced state on a non-contiguous fermionic region is therefore the state of the
CAR subalgebra generated by those modes, re-indexed to consecutive positions.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ContractError, DomainError, PreconditionError, UnsupportedExtensionError
from .lattice import (
    PAULI,
    LocalOperator,
    Parity,
    Region,
    Statistics,
    Window,
    as_sites,
    bring_to_front,
    kron_all,
    embed,
    majorana_operators,
    parity_diagonal,
    partial_trace_tail,
    send_back,
)
from .linalg import eigh, eigvalsh, hermitize, logm_psd, normalized_exp, random_density_matrix, random_unitary
from .potential import Potential, inner_hamiltonian

FAITHFUL_TOL = 1e-12
EVEN_TOL = 1e-12


class ParityFlag(str, enum.Enum):
    EVEN = "even"
    NON_EVEN = "non-even"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class DensityState:
    matrix: np.ndarray
    sites: tuple[int, ...]
    statistics: Statistics = Statistics.SPIN
    parity_flag: ParityFlag = ParityFlag.UNKNOWN
    # spectrum, when the constructor already knows it (Gibbs states)
    spectrum: np.ndarray | None = field(default=None, repr=False)
    # exact logarithm, when known (Gibbs states); avoids log of tiny eigenvalues
    log_matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        m = m.astype(complex if np.iscomplexobj(m) else float, copy=False)
        sites = as_sites(self.sites)
        if m.shape != (2 ** len(sites), 2 ** len(sites)):
            raise ContractError(f"matrix shape {m.shape} does not match {len(sites)} sites")
        if abs(np.trace(m) - 1) > 1e-10:
            raise ContractError(f"trace {np.trace(m).real:.3e} != 1")
        object.__setattr__(self, "matrix", hermitize(m))
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        flag = ParityFlag(self.parity_flag)
        if flag is ParityFlag.UNKNOWN and self.statistics is Statistics.FERMION:
            flag = ParityFlag.EVEN if parity_residual(m, len(sites)) <= EVEN_TOL else ParityFlag.NON_EVEN
        object.__setattr__(self, "parity_flag", flag)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_fermion(self) -> bool:
        return self.statistics is Statistics.FERMION

    def eigenvalues(self) -> np.ndarray:
        if self.spectrum is not None:
            return np.sort(self.spectrum)
        return eigvalsh(self.matrix)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def expect(self, op: np.ndarray | LocalOperator) -> complex:
        m = op.matrix if isinstance(op, LocalOperator) else op
        return complex(np.einsum("ij,ji->", self.matrix, m))

    def check(self, tol: float = 1e-12) -> None:
        """Validate positivity, trace and (for flagged-even fermion states) parity."""
        if self.min_eigenvalue() < -tol:
            raise ContractError(f"negative eigenvalue {self.min_eigenvalue():.3e}")
        if self.parity_flag is ParityFlag.EVEN and parity_residual(self.matrix, self.n_sites) > tol:
            raise ContractError("state flagged even does not commute with parity")


def parity_residual(matrix: np.ndarray, n_sites: int) -> float:
    pd = parity_diagonal(n_sites)
    return float(np.max(np.abs(matrix - matrix * np.outer(pd, pd)), initial=0.0))


def _flag_for(statistics: Statistics, even: bool) -> ParityFlag:
    if statistics is Statistics.SPIN:
        return ParityFlag.UNKNOWN
    return ParityFlag.EVEN if even else ParityFlag.UNKNOWN


def tracial_state(sites: Iterable[int], statistics: Statistics = Statistics.SPIN) -> DensityState:
    sites = as_sites(sites)
    d = 2 ** len(sites)
    return DensityState(np.eye(d, dtype=complex) / d, sites, statistics, _flag_for(statistics, True))


def pure_state(vector: np.ndarray, sites: Iterable[int], statistics: Statistics = Statistics.SPIN) -> DensityState:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityState(np.outer(v, v.conj()), sites, statistics)


def random_state(
    sites: Iterable[int],
    rng: np.random.Generator,
    statistics: Statistics = Statistics.SPIN,
    even: bool = False,
    rank: int | None = None,
) -> DensityState:
    """Ginibre-random state; ``even=True`` projects out odd coherences (fermions)."""
    sites = as_sites(sites)
    m = random_density_matrix(2 ** len(sites), rng, rank)
    if even:
        pd = parity_diagonal(len(sites))
        m = m * (np.outer(pd, pd) > 0)
    return DensityState(m, sites, statistics)


# --- Gibbs and ground states ----------------------------------------------


def gibbs_from_hamiltonian(
    h: np.ndarray, beta: float, sites: Iterable[int], statistics: Statistics = Statistics.SPIN
) -> DensityState:
    if not beta > 0 or not np.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    h = np.asarray(h)
    w, v = eigh(h)
    shifted = -beta * (w - w[0])
    log_z = float(np.log(np.sum(np.exp(shifted))))
    p = np.exp(shifted - log_z)
    d = (v * p) @ v.conj().T
    log_d = (v * (shifted - log_z)) @ v.conj().T
    even = statistics is Statistics.FERMION and parity_residual(h, len(as_sites(sites))) <= 1e-12
    return DensityState(d, sites, statistics, _flag_for(statistics, even), spectrum=p, log_matrix=log_d)


def _hull(region: Region) -> Region:
    w = region.window
    if not region.sites:
        raise PreconditionError("Gibbs state of an empty region")
    return Region(range(region.sites[0], region.sites[-1] + 1), w)


def gibbs_state(phi: Potential, region: Region, beta: float) -> DensityState:
    """Local Gibbs state ``exp(-beta H_I) / Tr exp(-beta H_I)`` on ``A(I)``."""
    hull = _hull(region)
    sub = Window(hull.sites[0], hull.sites[-1], region.window.statistics)
    h = inner_hamiltonian(phi, Region(region.sites, sub)).matrix
    state = gibbs_from_hamiltonian(h, beta, sub.sites, sub.statistics)
    if hull.sites == region.sites:
        return state
    return reduce(state, region.sites)


class GroundState(NamedTuple):
    state: DensityState
    degeneracy: int
    gap: float


def ground_state_from_hamiltonian(
    h: np.ndarray, sites: Iterable[int], statistics: Statistics = Statistics.SPIN, rel_tol: float = 1e-10
) -> GroundState:
    w, v = eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    deg = int(np.sum(w - w[0] <= rel_tol * scale))
    p = v[:, :deg] @ v[:, :deg].conj().T / deg
    gap = float(w[deg] - w[0]) if deg < len(w) else 0.0
    return GroundState(DensityState(p, sites, statistics), deg, gap)


def ground_state(phi: Potential, region: Region, rel_tol: float = 1e-10) -> GroundState:
    """Normalized projector onto the lowest eigenspace of ``H_I``, with its degeneracy."""
    hull = _hull(region)
    sub = Window(hull.sites[0], hull.sites[-1], region.window.statistics)
    h = inner_hamiltonian(phi, Region(region.sites, sub)).matrix
    gs = ground_state_from_hamiltonian(h, sub.sites, sub.statistics, rel_tol)
    if hull.sites == region.sites:
        return gs
    return GroundState(reduce(gs.state, region.sites), gs.degeneracy, gs.gap)


# --- reductions and product extensions -------------------------------------


def reduce(rho: DensityState, region: Iterable[int]) -> DensityState:
    """Restriction of ``rho`` to the (CAR) subalgebra of ``region``.

    Spin states are partially traced. Fermionic modes of ``region`` are first moved
    to the front by a mode-relabelling unitary; their JW operators are then local
    on the leading factor and the restriction is a partial trace over the tail.
    """
    sites = as_sites(region)
    missing = set(sites) - set(rho.sites)
    if missing:
        raise PreconditionError(f"sites {sorted(missing)} not in state support {rho.sites}")
    if sites == rho.sites:
        return rho
    m = bring_to_front(rho.matrix, rho.sites, sites, rho.statistics)
    red = partial_trace_tail(m, 2 ** len(sites))
    flag = ParityFlag.EVEN if rho.parity_flag is ParityFlag.EVEN else ParityFlag.UNKNOWN
    return DensityState(red, sites, rho.statistics, flag)


def monomial_basis(n_sites: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """All ``4^n`` Majorana monomials ``g_{k1} ... g_{km}`` (``k1 < ... < km``) on ``n`` modes."""
    gam = majorana_operators(n_sites)
    d = 2**n_sites
    out = []
    for r in range(2 * n_sites + 1):
        for ks in itertools.combinations(range(2 * n_sites), r):
            m = np.eye(d, dtype=complex)
            for k in ks:
                m = m @ gam[k]
            out.append((ks, m))
    return out


def reduce_by_monomials(rho: DensityState, region: Iterable[int]) -> DensityState:
    """Reference reduction by expansion over a Hermitian-orthogonal monomial basis.

    ``D_A = sum_k rho(e_k^dag) e_k / 2^|A|`` with ``e_k`` the Majorana monomials of the
    modes in ``region``, evaluated on the parent window and re-expressed on ``|A|``
    canonical modes. Cost grows as ``4^|A|``; meant as an independent oracle.
    """
    sites = as_sites(region)
    if rho.statistics is Statistics.SPIN:
        raise PreconditionError("monomial reduction is defined for fermions only")
    pos = [rho.sites.index(s) for s in sites]
    parent = majorana_operators(rho.n_sites)
    small = monomial_basis(len(sites))
    d = 2 ** len(sites)
    out = np.zeros((d, d), dtype=complex)
    for ks, e_small in small:
        e_big = np.eye(rho.dim, dtype=complex)
        for k in ks:
            j, r = divmod(k, 2)
            e_big = e_big @ parent[2 * pos[j] + r]
        val = np.trace(rho.matrix @ e_big.conj().T)
        out += val * e_small / d
    return DensityState(out, sites, rho.statistics)


def product_extend(rho_a: DensityState, rho_b: DensityState) -> DensityState:
    """Product state of two states on disjoint site sets.

    Fermionic extensions require both states even; the JW Kronecker product in the
    ordering ``A`` then ``B`` is then the CAR product state, and it is relabelled
    back to ascending site order.
    """
    if rho_a.statistics is not rho_b.statistics:
        raise PreconditionError("mixed statistics in product extension")
    if set(rho_a.sites) & set(rho_b.sites):
        raise PreconditionError(f"overlapping supports {rho_a.sites} and {rho_b.sites}")
    fermion = rho_a.statistics is Statistics.FERMION
    if fermion:
        for r in (rho_a, rho_b):
            if parity_residual(r.matrix, r.n_sites) > EVEN_TOL:
                raise UnsupportedExtensionError("fermionic product extension needs even states")
    m = np.kron(rho_a.matrix, rho_b.matrix)
    all_sites = as_sites(rho_a.sites + rho_b.sites)
    if all_sites != rho_a.sites + rho_b.sites:
        m = send_back(m, all_sites, rho_a.sites, rho_a.statistics)
    flag = ParityFlag.EVEN if fermion else ParityFlag.UNKNOWN
    return DensityState(m, all_sites, rho_a.statistics, flag)


def is_even(rho: DensityState) -> tuple[bool, float]:
    """``(||P D P - D|| <= 1e-12, residual)``; spin states are trivially even."""
    if rho.statistics is Statistics.SPIN:
        return True, 0.0
    r = parity_residual(rho.matrix, rho.n_sites)
    return r <= EVEN_TOL, r


# --- perturbations ---------------------------------------------------------


def _as_matrix(h: np.ndarray | LocalOperator) -> np.ndarray:
    return h.matrix if isinstance(h, LocalOperator) else np.asarray(h)


def perturb(omega: DensityState, h: np.ndarray | LocalOperator) -> DensityState:
    """Perturbed state ``exp(log D + h) / Tr exp(log D + h)``.

    Uses ``omega.log_matrix`` when available; otherwise ``omega`` must be faithful.
    """
    hm = _as_matrix(h)
    if hm.shape != omega.matrix.shape:
        raise ContractError(f"perturbation shape {hm.shape} does not match state {omega.matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(hm), initial=0.0)))
    if not np.allclose(hm, hm.conj().T, atol=1e-12 * scale):
        raise ContractError("perturbation must be Hermitian")
    log_d = omega.log_matrix
    if log_d is None:
        w, v = eigh(omega.matrix)
        if w[0] <= FAITHFUL_TOL:
            raise DomainError(f"state is not faithful (min eigenvalue {w[0]:.3e})")
        log_d = (v * np.log(w)) @ v.conj().T
    d = normalized_exp(log_d + hermitize(hm))
    even = omega.parity_flag is ParityFlag.EVEN and parity_residual(hm, omega.n_sites) <= 1e-12
    return DensityState(d, omega.sites, omega.statistics, _flag_for(omega.statistics, even))


# --- local channels --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Channel:
    """Kraus channel on ``sites``; Kraus operators are in the canonical representation of ``sites``."""

    kraus: tuple[np.ndarray, ...]
    sites: tuple[int, ...]
    statistics: Statistics = Statistics.SPIN
    label: str = "channel"

    def __post_init__(self) -> None:
        object.__setattr__(self, "sites", as_sites(self.sites))
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        d = 2 ** len(self.sites)
        total = sum(k.conj().T @ k for k in self.kraus)
        if not np.allclose(total, np.eye(d), atol=1e-12):
            raise ContractError("Kraus operators are not trace preserving")
        if self.statistics is Statistics.FERMION:
            pd = parity_diagonal(len(self.sites))
            for k in self.kraus:
                odd = np.abs(k[np.outer(pd, pd) > 0]).max(initial=0.0)
                even = np.abs(k[np.outer(pd, pd) < 0]).max(initial=0.0)
                if min(odd, even) > 1e-12:
                    raise ContractError("fermionic Kraus operators need definite parity")

    def apply(self, rho: DensityState) -> DensityState:
        missing = set(self.sites) - set(rho.sites)
        if missing:
            raise PreconditionError(f"channel sites {sorted(missing)} outside state support")
        d = 2 ** len(self.sites)
        rest = rho.dim // d
        m = bring_to_front(rho.matrix, rho.sites, self.sites, rho.statistics).reshape(d, rest, d, rest)
        out = np.zeros_like(m, dtype=complex)
        for k in self.kraus:
            left = np.tensordot(k, m, axes=(1, 0))
            out += np.moveaxis(np.tensordot(left, k.conj(), axes=(2, 1)), 3, 2)
        out = send_back(out.reshape(rho.dim, rho.dim), rho.sites, self.sites, rho.statistics)
        return DensityState(out, rho.sites, rho.statistics, rho.parity_flag)


def identity_channel(sites: Iterable[int], statistics: Statistics = Statistics.SPIN) -> Channel:
    sites = as_sites(sites)
    return Channel((np.eye(2 ** len(sites), dtype=complex),), sites, statistics, "identity")


def _pauli_strings(n: int) -> list[np.ndarray]:
    return [kron_all([PAULI[c] for c in word]) for word in itertools.product("IXYZ", repeat=n)]


def depolarizing_channel(sites: Iterable[int], p: float = 1.0, statistics: Statistics = Statistics.SPIN) -> Channel:
    """``(1-p) id + p (tr_I (x) id)`` as a Pauli twirl; each Pauli string has definite parity."""
    sites = as_sites(sites)
    n = len(sites)
    strings = _pauli_strings(n)
    kraus = [np.sqrt(1 - p + p / 4**n) * strings[0]] + [np.sqrt(p / 4**n) * s for s in strings[1:]]
    return Channel(tuple(kraus), sites, statistics, f"depolarize(p={p:g})")


def dephasing_channel(sites: Iterable[int], p: float, statistics: Statistics = Statistics.SPIN) -> Channel:
    """Independent ``Z`` dephasing on each site of the region (``Z = 1 - 2n`` for fermions)."""
    sites = as_sites(sites)
    n = len(sites)
    kraus = []
    for pattern in itertools.product((0, 1), repeat=n):
        weight = np.prod([p if b else 1 - p for b in pattern])
        if weight == 0:
            continue
        op = kron_all([PAULI["Z"] if b else PAULI["I"] for b in pattern])
        kraus.append(np.sqrt(weight) * op)
    return Channel(tuple(kraus), sites, statistics, f"dephase(p={p:g})")


def random_even_unitary(n_sites: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary on each parity sector, assembled block-diagonally."""
    pd = parity_diagonal(n_sites)
    u = np.zeros((2**n_sites, 2**n_sites), dtype=complex)
    for sector in (1.0, -1.0):
        idx = np.flatnonzero(pd == sector)
        u[np.ix_(idx, idx)] = random_unitary(len(idx), rng)
    return u


def random_unitary_channel(
    sites: Iterable[int], rng: np.random.Generator, statistics: Statistics = Statistics.SPIN, n_unitaries: int = 3
) -> Channel:
    """Random mixture of (parity-preserving, for fermions) unitaries on the region."""
    sites = as_sites(sites)
    n = len(sites)
    probs = rng.dirichlet(np.ones(n_unitaries))
    draw = random_even_unitary if statistics is Statistics.FERMION else (lambda k, r: random_unitary(2**k, r))
    kraus = tuple(np.sqrt(p) * draw(n, rng) for p in probs)
    return Channel(kraus, sites, statistics, f"random-unitary(k={n_unitaries})")


def random_local_channel(
    sites: Iterable[int], rng: np.random.Generator, statistics: Statistics = Statistics.SPIN
) -> Channel:
    """Random unitary mixture followed by dephasing or partial depolarization."""
    sites = as_sites(sites)
    u = random_unitary_channel(sites, rng, statistics, int(rng.integers(1, 4)))
    if rng.random() < 0.5:
        second = dephasing_channel(sites, float(rng.random()), statistics)
    else:
        second = depolarizing_channel(sites, float(rng.random()), statistics)
    kraus = tuple(b @ a for a in u.kraus for b in second.kraus)
    return Channel(kraus, sites, statistics, f"{u.label}+{second.label}")


def lts_trial(rho: DensityState, region: Iterable[int], channel: Channel) -> DensityState:
    """``(channel (x) id)(rho)``; the exterior marginal is unchanged."""
    sites = as_sites(region)
    if not set(channel.sites) <= set(sites):
        raise PreconditionError(f"channel on {channel.sites} not supported in region {sites}")
    if rho.is_fermion and rho.parity_flag is not ParityFlag.EVEN:
        raise PreconditionError("fermionic LTS trials need an even state")
    return channel.apply(rho)


def embed_operator(op: np.ndarray, op_sites: Sequence[int], rho: DensityState) -> np.ndarray:
    """Lift an operator on ``op_sites`` (canonical representation) to the support of ``rho``."""
    return embed(op, as_sites(op_sites), rho.sites, rho.statistics)


def log_density(rho: DensityState) -> np.ndarray:
    return rho.log_matrix if rho.log_matrix is not None else logm_psd(rho.matrix)
