"""Operator algebra of a finite window of a spin-1/2 or spinless-fermion chain.

Sites of a window ``[lo, hi]`` are laid out in Kronecker order, leftmost site
most significant. Fermions use the Jordan-Wigner representation with the string
running over sites of smaller index::

    c_i = Z_lo ... Z_{i-1} (X_i + i Y_i) / 2

so that ``|1>`` (``Z = -1``) is the occupied state and the parity unitary is
``P = prod_i Z_i``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractError, PreconditionError, ResourceError
from .linalg import operator_norm

DIM_CAP = 2**14


class Statistics(str, enum.Enum):
    SPIN = "spin"
    FERMION = "fermion"


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
# annihilator on one mode: |1> -> |0>
SIGMA_MINUS = (X + 1j * Y) / 2
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class Window:
    """Contiguous block of sites ``lo..hi`` (inclusive) of the chain."""

    lo: int
    hi: int
    statistics: Statistics = Statistics.SPIN

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise PreconditionError(f"empty window [{self.lo}, {self.hi}]")
        object.__setattr__(self, "statistics", Statistics(self.statistics))

    @classmethod
    def of_size(cls, n: int, statistics: Statistics = Statistics.SPIN, lo: int = 0) -> "Window":
        return cls(lo, lo + n - 1, statistics)

    @property
    def n_sites(self) -> int:
        return self.hi - self.lo + 1

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    @property
    def is_fermion(self) -> bool:
        return self.statistics is Statistics.FERMION

    def position(self, site: int) -> int:
        if not self.lo <= site <= self.hi:
            raise PreconditionError(f"site {site} outside window [{self.lo}, {self.hi}]")
        return site - self.lo

    def __contains__(self, site: object) -> bool:
        return isinstance(site, (int, np.integer)) and self.lo <= site <= self.hi

    def check_cap(self, cap: int = DIM_CAP) -> None:
        if self.dim > cap:
            raise ResourceError(f"window of {self.n_sites} sites has dimension {self.dim} > cap {cap}")

    def region(self, sites: Iterable[int] | None = None) -> "Region":
        return Region(self.sites if sites is None else sites, self)


class Region:
    """Ordered set of sites inside a window; may be non-contiguous or empty."""

    __slots__ = ("sites", "window")

    def __init__(self, sites: Iterable[int], window: Window):
        s = tuple(sorted({int(x) for x in sites}))
        bad = [x for x in s if x not in window]
        if bad:
            raise PreconditionError(f"sites {bad} outside window [{window.lo}, {window.hi}]")
        self.sites = s
        self.window = window

    def __iter__(self) -> Iterator[int]:
        return iter(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: object) -> bool:
        return site in self.sites

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Region):
            return self.sites == other.sites and self.window == other.window
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.sites, self.window))

    def __repr__(self) -> str:
        return f"Region({list(self.sites)})"

    @property
    def complement(self) -> "Region":
        return Region((s for s in self.window.sites if s not in self.sites), self.window)

    @property
    def is_contiguous(self) -> bool:
        return not self.sites or self.sites[-1] - self.sites[0] + 1 == len(self.sites)

    def union(self, other: Iterable[int]) -> "Region":
        return Region(set(self.sites) | set(other), self.window)

    def isdisjoint(self, other: Iterable[int]) -> bool:
        return set(self.sites).isdisjoint(other)


def as_sites(region: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted({int(s) for s in region}))


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def embed_local(op: np.ndarray, first: int, n_sites: int) -> np.ndarray:
    """Place an operator acting on ``k`` consecutive positions starting at ``first``."""
    k = int(round(np.log2(op.shape[0])))
    left = np.eye(2**first, dtype=op.dtype)
    right = np.eye(2 ** (n_sites - first - k), dtype=op.dtype)
    return np.kron(np.kron(left, op), right)


def parity_diagonal(n_sites: int) -> np.ndarray:
    """Diagonal of ``prod_i Z_i`` on ``n_sites`` modes."""
    idx = np.arange(2**n_sites)
    counts = np.zeros_like(idx)
    for q in range(n_sites):
        counts += (idx >> q) & 1
    return np.where(counts % 2 == 0, 1.0, -1.0)


def site_operator(window: Window, site: int, name: str) -> np.ndarray:
    """Full-window matrix of a single-site generator.

    Spin windows accept ``"X"``, ``"Y"``, ``"Z"``; fermion windows accept
    ``"c"``, ``"cdag"``, ``"n"`` (and the Pauli names, which are not JW-dressed).
    """
    window.check_cap()
    n = window.n_sites
    p = window.position(site)
    if name in PAULI:
        factors = [I2] * n
        factors[p] = PAULI[name]
        return kron_all(factors)
    if not window.is_fermion:
        raise PreconditionError(f"unknown spin generator {name!r}")
    local = {"c": SIGMA_MINUS, "cdag": SIGMA_MINUS.conj().T, "n": SIGMA_MINUS.conj().T @ SIGMA_MINUS}
    if name not in local:
        raise PreconditionError(f"unknown fermion generator {name!r}")
    string = Z if name != "n" else I2
    factors = [string] * p + [local[name]] + [I2] * (n - p - 1)
    return kron_all(factors)


class SiteOperators(Mapping):
    """Lazy ``site -> {name: matrix}`` map; matrices are built on access."""

    def __init__(self, window: Window):
        self.window = window
        self.names = ("c", "cdag") if window.is_fermion else ("X", "Y", "Z")

    def __getitem__(self, site: int) -> dict[str, np.ndarray]:
        if site not in self.window:
            raise KeyError(site)
        return {name: site_operator(self.window, site, name) for name in self.names}

    def __iter__(self) -> Iterator[int]:
        return iter(self.window.sites)

    def __len__(self) -> int:
        return self.window.n_sites


def site_operators(window: Window, cap: int = DIM_CAP) -> SiteOperators:
    """Generators per site: Paulis for spins, Jordan-Wigner ``c``/``cdag`` for fermions."""
    window.check_cap(cap)
    return SiteOperators(window)


def majorana_operators(n_sites: int) -> list[np.ndarray]:
    """Jordan-Wigner Majoranas ``g_{2j} = c_j + c_j^dag``, ``g_{2j+1} = i (c_j^dag - c_j)``."""
    out = []
    for j in range(n_sites):
        string = [Z] * j
        rest = [I2] * (n_sites - j - 1)
        out.append(kron_all(string + [X] + rest))
        out.append(kron_all(string + [Y] + rest))
    return out


def classify_parity(matrix: np.ndarray, n_sites: int, statistics: Statistics, tol: float = 1e-12) -> Parity:
    if statistics is Statistics.SPIN:
        return Parity.EVEN
    pd = parity_diagonal(n_sites)
    scale = max(np.max(np.abs(matrix)), 1.0)
    signs = np.outer(pd, pd)
    odd_part = np.max(np.abs(matrix[signs < 0]), initial=0.0)
    even_part = np.max(np.abs(matrix[signs > 0]), initial=0.0)
    if odd_part <= tol * scale:
        return Parity.EVEN
    if even_part <= tol * scale:
        return Parity.ODD
    return Parity.MIXED


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Dense operator on a window together with its declared support and grading."""

    matrix: np.ndarray
    support: Region
    parity: Parity

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, support: Region) -> "LocalOperator":
        w = support.window
        parity = classify_parity(matrix, w.n_sites, w.statistics)
        return cls(np.asarray(matrix, dtype=complex), support, parity)

    @property
    def window(self) -> Window:
        return self.support.window

    @property
    def is_hermitian(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix), initial=0.0)))
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=1e-12 * scale))

    def norm(self) -> float:
        return operator_norm(self.matrix)

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        return LocalOperator.from_matrix(self.matrix + other.matrix, self.support.union(other.support))

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        return LocalOperator.from_matrix(self.matrix - other.matrix, self.support.union(other.support))

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        return LocalOperator.from_matrix(self.matrix @ other.matrix, self.support.union(other.support))

    def __mul__(self, scalar: complex) -> "LocalOperator":
        return LocalOperator(scalar * self.matrix, self.support, self.parity)

    __rmul__ = __mul__

    def dag(self) -> "LocalOperator":
        return LocalOperator(self.matrix.conj().T, self.support, self.parity)


def generator(window: Window, site: int, name: str) -> LocalOperator:
    """Single-site generator wrapped as a LocalOperator.

    For fermions the support is the single site even though the JW matrix carries a string.
    """
    return LocalOperator.from_matrix(site_operator(window, site, name), Region([site], window))


class GradedPart(NamedTuple):
    even: LocalOperator
    odd: LocalOperator


def _theta_matrix(matrix: np.ndarray, n_sites: int) -> np.ndarray:
    pd = parity_diagonal(n_sites)
    return matrix * np.outer(pd, pd)


def parity_map(op: LocalOperator) -> LocalOperator:
    """Grading automorphism ``P op P``; identity map for spin windows."""
    w = op.window
    if not w.is_fermion:
        return op
    m = _theta_matrix(op.matrix, w.n_sites)
    return LocalOperator(m, op.support, op.parity)


def even_odd_decompose(op: LocalOperator) -> GradedPart:
    theta = parity_map(op).matrix
    even = LocalOperator((op.matrix + theta) / 2, op.support, Parity.EVEN)
    odd = LocalOperator((op.matrix - theta) / 2, op.support, Parity.ODD)
    return GradedPart(even, odd)


def theta_sign(p: Parity, q: Parity) -> int:
    """Graded-commutation sign: ``-1`` iff both arguments are odd."""
    p, q = Parity(p), Parity(q)
    if Parity.MIXED in (p, q):
        raise ContractError("theta_sign needs definite parities")
    return -1 if p is Parity.ODD and q is Parity.ODD else 1


def graded_locality_check(a: LocalOperator, b: LocalOperator) -> float:
    """Return ``||ab - theta(a, b) ba||`` for operators with disjoint supports."""
    if not a.support.isdisjoint(b.support):
        raise PreconditionError(f"supports overlap: {a.support} and {b.support}")
    if a.window.is_fermion:
        sign = theta_sign(a.parity, b.parity)
    else:
        sign = 1
    return operator_norm(a.matrix @ b.matrix - sign * (b.matrix @ a.matrix))


# --- mode reordering -------------------------------------------------------


def mode_permutation(n_sites: int, order: Sequence[int], fermionic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Basis map of the unitary ``U`` that relabels modes.

    ``order[q]`` is the old position moved to new position ``q``. Returns
    ``(old_index, sign)`` indexed by new basis index ``m`` such that
    ``U |old_index[m]> = sign[m] |m>``. For fermions ``U c_{order[q]} U^dag = c'_q``,
    which costs a sign equal to the parity of the reordering restricted to
    occupied modes.
    """
    order = list(order)
    if sorted(order) != list(range(n_sites)):
        raise PreconditionError(f"order {order} is not a permutation of {n_sites} positions")
    idx = np.arange(2**n_sites)
    bits = [(idx >> (n_sites - 1 - q)) & 1 for q in range(n_sites)]
    old_index = np.zeros_like(idx)
    for q, src in enumerate(order):
        old_index |= bits[q] << (n_sites - 1 - src)
    sign = np.ones(idx.shape, dtype=float)
    if fermionic:
        inversions = np.zeros_like(idx)
        for q1 in range(n_sites):
            for q2 in range(q1 + 1, n_sites):
                if order[q1] > order[q2]:
                    inversions += bits[q1] & bits[q2]
        sign = np.where(inversions % 2 == 0, 1.0, -1.0)
    return old_index, sign


def _order_for(all_sites: Sequence[int], first: Sequence[int]) -> list[int]:
    pos = {s: i for i, s in enumerate(all_sites)}
    first_set = set(first)
    return [pos[s] for s in first] + [pos[s] for s in all_sites if s not in first_set]


def bring_to_front(matrix: np.ndarray, all_sites: Sequence[int], first: Sequence[int], statistics: Statistics) -> np.ndarray:
    """Conjugate ``matrix`` so the modes in ``first`` become the leading positions, in ascending order."""
    order = _order_for(all_sites, sorted(first))
    if order == list(range(len(all_sites))):
        return matrix
    old, sign = mode_permutation(len(all_sites), order, statistics is Statistics.FERMION)
    return matrix[np.ix_(old, old)] * np.outer(sign, sign)


def send_back(matrix: np.ndarray, all_sites: Sequence[int], first: Sequence[int], statistics: Statistics) -> np.ndarray:
    """Inverse of :func:`bring_to_front`."""
    order = _order_for(all_sites, sorted(first))
    if order == list(range(len(all_sites))):
        return matrix
    old, sign = mode_permutation(len(all_sites), order, statistics is Statistics.FERMION)
    out = np.empty_like(matrix)
    out[np.ix_(old, old)] = matrix * np.outer(sign, sign)
    return out


def partial_trace_tail(matrix: np.ndarray, keep_dim: int) -> np.ndarray:
    """Trace out the trailing tensor factor, keeping the leading ``keep_dim`` block."""
    rest = matrix.shape[0] // keep_dim
    return np.einsum("ijkj->ik", matrix.reshape(keep_dim, rest, keep_dim, rest))


def embed(op: np.ndarray, op_sites: Sequence[int], all_sites: Sequence[int], statistics: Statistics) -> np.ndarray:
    """Lift an operator given in the canonical representation of ``op_sites`` to ``all_sites``.

    Exact for spins and for fermionic operators of any parity: modes of
    ``op_sites`` are moved to the front, where Jordan-Wigner operators are local.
    """
    op_sites = sorted(op_sites)
    extra = 2 ** (len(all_sites) - len(op_sites))
    full = np.kron(op, np.eye(extra, dtype=complex))
    return send_back(full, all_sites, op_sites, statistics)
