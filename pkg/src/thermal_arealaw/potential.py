"""Translation-invariant finite-range potentials and the Hamiltonians they generate.

A potential is a list of base terms ``(base_set, matrix)``. ``base_set`` has
minimum 0; ``matrix`` acts on the contiguous hull ``0..max(base_set)`` in the
local (Jordan-Wigner, for fermions) representation. The term anchored at ``x``
acts on ``base_set + x``. Fermionic terms are even, so their JW matrices on the
hull embed into any larger window by a plain Kronecker product.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractError, PreconditionError
from .lattice import (
    I2,
    SIGMA_MINUS,
    LocalOperator,
    Parity,
    Region,
    Statistics,
    Window,
    X,
    Y,
    Z,
    classify_parity,
    embed_local,
)
from .linalg import operator_norm


@dataclass(frozen=True, eq=False)
class Term:
    base: tuple[int, ...]
    matrix: np.ndarray

    @property
    def diameter(self) -> int:
        return self.base[-1]


@dataclass(frozen=True, eq=False)
class Potential:
    """Finite-range interaction ``Phi``.

    ``cuts`` lists bonds ``c`` such that every term meeting both ``{< c}`` and
    ``{>= c}`` is dropped; a non-empty ``cuts`` gives the decoupled potential.
    """

    terms: tuple[Term, ...]
    statistics: Statistics
    name: str = "custom"
    cuts: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        for t in self.terms:
            if t.base[0] != 0 or list(t.base) != sorted(set(t.base)):
                raise ContractError(f"base set {t.base} must be sorted, unique and start at 0")
            dim = 2 ** (t.diameter + 1)
            if t.matrix.shape != (dim, dim):
                raise ContractError(f"term on {t.base} needs a {dim}x{dim} matrix")
            if not np.allclose(t.matrix, t.matrix.conj().T, atol=1e-13):
                raise ContractError(f"term on {t.base} is not Hermitian")
            if self.statistics is Statistics.FERMION:
                if classify_parity(t.matrix, t.diameter + 1, self.statistics) is not Parity.EVEN:
                    raise ContractError(f"fermionic term on {t.base} is not even")

    @property
    def range(self) -> int:
        return max((t.diameter for t in self.terms), default=0)

    def placements(self, lo: int, hi: int) -> Iterator[tuple[int, Term, tuple[int, ...]]]:
        """Yield ``(x, term, sites)`` for every translate whose hull lies inside ``[lo, hi]``."""
        for t in self.terms:
            for x in range(lo, hi - t.diameter + 1):
                sites = tuple(b + x for b in t.base)
                if any(min(sites) < c <= max(sites) for c in self.cuts):
                    continue
                yield x, t, sites

    def crossing_placements(self, lo: int, hi: int) -> Iterator[tuple[int, Term, tuple[int, ...]]]:
        """Translates whose sites reach inside ``[lo, hi]`` but whose hull does not fit."""
        for t in self.terms:
            for x in range(lo - t.diameter, hi + 1):
                sites = tuple(b + x for b in t.base)
                if x >= lo and x + t.diameter <= hi:
                    continue
                if not any(lo <= s <= hi for s in sites):
                    continue
                if any(min(sites) < c <= max(sites) for c in self.cuts):
                    continue
                yield x, t, sites


def _assemble(phi: Potential, window: Window, keep: Callable[[tuple[int, ...]], bool]) -> np.ndarray:
    window.check_cap()
    n = window.n_sites
    real = all(not np.any(t.matrix.imag) for t in phi.terms)
    h = np.zeros((window.dim, window.dim), dtype=float if real else complex)
    for x, t, sites in phi.placements(window.lo, window.hi):
        if keep(sites):
            h += embed_local(t.matrix.real if real else t.matrix, x - window.lo, n)
    return h


def _selected_sites(phi: Potential, window: Window, keep: Callable[[tuple[int, ...]], bool]) -> set[int]:
    out: set[int] = set()
    for _, _, sites in phi.placements(window.lo, window.hi):
        if keep(sites):
            out.update(sites)
    return out


def _local_norm(phi: Potential, window: Window, keep: Callable[[tuple[int, ...]], bool]) -> float:
    """Norm of a sum of selected terms, evaluated on the hull of their supports."""
    sites = _selected_sites(phi, window, keep)
    if not sites:
        return 0.0
    hull = Window(min(sites), max(sites), window.statistics)
    return operator_norm(_assemble(phi, hull, keep))


def _check_window(phi: Potential, window: Window) -> None:
    if window.statistics is not phi.statistics:
        raise PreconditionError(f"{phi.statistics.value} potential on a {window.statistics.value} window")


def inner_hamiltonian(phi: Potential, region: Region) -> LocalOperator:
    """``H_I``: sum of all translates contained in ``I``."""
    window = region.window
    _check_window(phi, window)
    inside = set(region.sites)
    h = _assemble(phi, window, lambda s: set(s) <= inside)
    return LocalOperator(h, region, Parity.EVEN)


class SurfaceEnergy(NamedTuple):
    operator: LocalOperator
    boundary: Region
    truncated: bool
    norm: float


def _crosses(sites: Iterable[int], inside: set[int]) -> bool:
    s = set(sites)
    return bool(s & inside) and bool(s - inside)


def surface_energy(phi: Potential, region: Region, window: Window | None = None) -> SurfaceEnergy:
    """``H_dI``: terms meeting both ``I`` and its complement, restricted to the window.

    ``truncated`` is set when some crossing term sticks out of the window, i.e. the
    window has less than ``d(Phi)`` clearance around ``I``.
    """
    window = window or region.window
    _check_window(phi, window)
    inside = set(region.sites)
    keep = lambda s: _crosses(s, inside)  # noqa: E731
    h = _assemble(phi, window, keep)
    support = Region(_selected_sites(phi, window, keep), window)
    truncated = any(_crosses(s, inside) for _, _, s in phi.crossing_placements(window.lo, window.hi))
    op = LocalOperator(h, support, Parity.EVEN)
    return SurfaceEnergy(op, support, truncated, _local_norm(phi, window, keep))


def open_hamiltonian(phi: Potential, region: Region, window: Window | None = None) -> LocalOperator:
    """``H_I + H_dI``."""
    window = window or region.window
    inside = set(region.sites)
    h = _assemble(phi, window, lambda s: bool(set(s) & inside))
    support = Region(_selected_sites(phi, window, lambda s: bool(set(s) & inside)) | inside, window)
    return LocalOperator(h, support, Parity.EVEN)


class Coupling(NamedTuple):
    operator: LocalOperator
    norm: float
    truncated: bool


def _straddles(sites: tuple[int, ...], cut: int) -> bool:
    return min(sites) < cut <= max(sites)


def half_chain_coupling(phi: Potential, cut: int, window: Window) -> Coupling:
    """``W_LR`` between sites ``< cut`` and ``>= cut``, with its spectral norm."""
    _check_window(phi, window)
    if not window.lo < cut <= window.hi:
        raise PreconditionError(f"cut {cut} not inside window [{window.lo}, {window.hi}]")
    keep = lambda s: _straddles(s, cut)  # noqa: E731
    h = _assemble(phi, window, keep)
    support = Region(_selected_sites(phi, window, keep), window)
    truncated = cut - window.lo < phi.range or window.hi - cut + 1 < phi.range
    return Coupling(LocalOperator(h, support, Parity.EVEN), _local_norm(phi, window, keep), truncated)


def coupling_norm(phi: Potential, cut: int = 0) -> float:
    """``||W_LR||`` of the infinite chain, computed on a window of ``2 d(Phi)`` sites around the cut."""
    d = max(phi.range, 1)
    return half_chain_coupling(phi, cut, Window(cut - d, cut + d - 1, phi.statistics)).norm


def decoupled_potential(phi: Potential, cut: int) -> Potential:
    """``Phi_{L,R}``: ``Phi`` with every term crossing the bond at ``cut`` removed."""
    return Potential(phi.terms, phi.statistics, f"{phi.name}|cut@{cut}", tuple(sorted(set(phi.cuts) | {cut})))


def window_hamiltonian(phi: Potential, window: Window) -> np.ndarray:
    """``H_W`` as a bare matrix."""
    _check_window(phi, window)
    return _assemble(phi, window, lambda s: True)


def max_term_norm(phi: Potential) -> float:
    """``c_Phi`` used in the geometric bound: largest norm of a single base term."""
    return max((operator_norm(t.matrix) for t in phi.terms), default=0.0)


def boundary_bonds(phi: Potential, region: Region, window: Window | None = None) -> int:
    """Number of term translates crossing ``dI`` (``|dI|`` for range-1 models)."""
    window = window or region.window
    inside = set(region.sites)
    return sum(1 for _, _, s in phi.placements(window.lo, window.hi) if _crosses(s, inside))


# --- model catalog ---------------------------------------------------------

def _pair(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def tfim(J: float = 1.0, g: float = 1.0) -> Potential:
    """``H = -J sum Z_i Z_{i+1} - g sum X_i``."""
    terms = (Term((0,), -g * X), Term((0, 1), -J * _pair(Z, Z)))
    return Potential(terms, Statistics.SPIN, f"tfim(J={J},g={g})")


def xxz(Jxy: float = 1.0, Jz: float = 1.0, h: float = 0.0) -> Potential:
    """``H = Jxy sum (XX + YY)/4 + Jz sum ZZ/4 - h sum Z/2``."""
    bond = Jxy * (_pair(X, X) + _pair(Y, Y)).real / 4 + Jz * _pair(Z, Z) / 4
    terms = (Term((0,), -h * Z / 2), Term((0, 1), bond.astype(complex)))
    return Potential(terms, Statistics.SPIN, f"xxz(Jxy={Jxy},Jz={Jz},h={h})")


def kitaev(t: float = 1.0, delta: float = 1.0, mu: float = 0.0) -> Potential:
    """``H = sum -t (c_i^dag c_{i+1} + h.c.) + delta (c_i c_{i+1} + h.c.) - mu (n_i - 1/2)``."""
    c0 = _pair(SIGMA_MINUS, I2)
    c1 = _pair(Z, SIGMA_MINUS)
    hop = c0.conj().T @ c1
    pair = c0 @ c1
    bond = -t * (hop + hop.conj().T) + delta * (pair + pair.conj().T)
    n = SIGMA_MINUS.conj().T @ SIGMA_MINUS
    onsite = -mu * (n - I2 / 2)
    terms = (Term((0,), onsite.astype(complex)), Term((0, 1), bond.astype(complex)))
    return Potential(terms, Statistics.FERMION, f"kitaev(t={t},delta={delta},mu={mu})")


def zero_potential(statistics: Statistics = Statistics.SPIN) -> Potential:
    return Potential((), statistics, "zero")


def onsite_potential(matrix: np.ndarray, statistics: Statistics = Statistics.SPIN) -> Potential:
    """Decoupled potential with only single-site terms."""
    return Potential((Term((0,), np.asarray(matrix, dtype=complex)),), statistics, "onsite")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict

    def __post_init__(self) -> None:
        key = self.name.lower()
        if key not in CATALOG:
            raise PreconditionError(f"unknown model {self.name!r}; choose from {sorted(CATALOG)}")
        factory, names, _ = CATALOG[key]
        unknown = set(self.params) - set(names)
        if unknown:
            raise PreconditionError(f"unknown parameters {sorted(unknown)} for {key}")
        for k, v in self.params.items():
            if not np.isfinite(float(v)):
                raise PreconditionError(f"parameter {k} must be finite")
        object.__setattr__(self, "name", key)

    @property
    def statistics(self) -> Statistics:
        return CATALOG[self.name][2]

    def full_params(self) -> dict:
        factory, names, _ = CATALOG[self.name]
        defaults = dict(zip(names, factory.__defaults__))
        defaults.update({k: float(v) for k, v in self.params.items()})
        return defaults

    def potential(self) -> Potential:
        return CATALOG[self.name][0](**self.full_params())

    def label(self) -> str:
        return f"{self.name}(" + ",".join(f"{k}={v:g}" for k, v in self.full_params().items()) + ")"


CATALOG: dict[str, tuple[Callable[..., Potential], tuple[str, ...], Statistics]] = {
    "tfim": (tfim, ("J", "g"), Statistics.SPIN),
    "xxz": (xxz, ("Jxy", "Jz", "h"), Statistics.SPIN),
    "kitaev": (kitaev, ("t", "delta", "mu"), Statistics.FERMION),
}


def materialize_term(term: Term, x: int, window: Window) -> LocalOperator:
    """The translate of ``term`` anchored at ``x`` as a full-window operator."""
    if x < window.lo or x + term.diameter > window.hi:
        raise PreconditionError(f"term anchored at {x} does not fit in the window")
    m = embed_local(term.matrix, x - window.lo, window.n_sites)
    return LocalOperator(m, Region([b + x for b in term.base], window), Parity.EVEN)

