"""Entropy functionals of density states, in nats.

Infinite relative entropies are returned as ``math.inf``; :func:`support_violation`
tells whether the infinity comes from a support mismatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError
from .lattice import Statistics, as_sites
from .linalg import LOG_FLOOR, eigh, entropy_of_spectrum, trace_norm
from .states import DensityState, ParityFlag, product_extend, reduce

SUPPORT_EIG_TOL = 1e-12
SUPPORT_WEIGHT_TOL = 1e-10


def _sites(rho: DensityState, region: Iterable[int] | None) -> tuple[int, ...]:
    return rho.sites if region is None else as_sites(region)


def von_neumann(rho: DensityState, region: Iterable[int] | None = None) -> float:
    """``S_A(rho) = -Tr D_A log D_A``; the empty region has entropy 0."""
    sites = _sites(rho, region)
    if not sites:
        return 0.0
    return entropy_of_spectrum(reduce(rho, sites).eigenvalues())


def _relative_terms(rho: DensityState, sigma: DensityState) -> tuple[float, bool]:
    p, u = eigh(rho.matrix)
    q, w = eigh(sigma.matrix)
    overlap = np.abs(u.conj().T @ w) ** 2
    weights = np.clip(p, 0.0, None) @ overlap
    null = q < SUPPORT_EIG_TOL
    if np.any(weights[null] > SUPPORT_WEIGHT_TOL):
        return math.inf, True
    log_q = np.log(np.maximum(q, LOG_FLOOR))
    value = -entropy_of_spectrum(p) - float(weights @ log_q)
    return value, False


def _check_pair(rho: DensityState, sigma: DensityState) -> None:
    if rho.sites != sigma.sites or rho.statistics is not sigma.statistics:
        raise PreconditionError(f"states live on different systems: {rho.sites} vs {sigma.sites}")


def relative_entropy(rho: DensityState, sigma: DensityState) -> float:
    """Umegaki relative entropy ``Tr D_rho (log D_rho - log D_sigma)``."""
    _check_pair(rho, sigma)
    return _relative_terms(rho, sigma)[0]


def support_violation(rho: DensityState, sigma: DensityState) -> bool:
    _check_pair(rho, sigma)
    return _relative_terms(rho, sigma)[1]


def trace_distance(rho: DensityState, sigma: DensityState) -> float:
    """``||rho - sigma||_1`` (trace norm, not halved)."""
    _check_pair(rho, sigma)
    return trace_norm(rho.matrix - sigma.matrix)


def _disjoint(a: tuple[int, ...], b: tuple[int, ...]) -> None:
    if set(a) & set(b):
        raise PreconditionError(f"regions overlap: {a} and {b}")


def conditional_entropy(rho: DensityState, region: Iterable[int], condition: Iterable[int] = ()) -> float:
    """``S_{I u J} - S_J``."""
    i, j = as_sites(region), as_sites(condition)
    _disjoint(i, j)
    if not j:
        return von_neumann(rho, i)
    return von_neumann(rho, i + j) - von_neumann(rho, j)


def mutual_entropy(rho: DensityState, a: Iterable[int], b: Iterable[int]) -> float:
    """``S_A + S_B - S_{AB}``."""
    a, b = as_sites(a), as_sites(b)
    _disjoint(a, b)
    return von_neumann(rho, a) + von_neumann(rho, b) - von_neumann(rho, a + b)


def mutual_entropy_relative(rho: DensityState, a: Iterable[int], b: Iterable[int]) -> float:
    """Mutual entropy as ``S(rho_AB | rho_A (x) rho_B)``, the product-extension route."""
    a, b = as_sites(a), as_sites(b)
    _disjoint(a, b)
    joint = reduce(rho, a + b)
    return relative_entropy(joint, product_extend(reduce(rho, a), reduce(rho, b)))


@dataclass
class ConvergenceSeries:
    """``(region_size, value)`` pairs along a ladder of growing regions."""

    sizes: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    tolerance: float = 1e-6
    direction: str = "non-increasing"

    @property
    def converged(self) -> bool:
        return len(self.values) >= 2 and abs(self.values[-1] - self.values[-2]) < self.tolerance

    @property
    def differences(self) -> list[float]:
        return [b - a for a, b in zip(self.values, self.values[1:])]

    def is_monotone(self, slack: float) -> bool:
        sign = -1.0 if self.direction == "non-increasing" else 1.0
        return all(sign * d >= -slack for d in self.differences)

    def first_converged_size(self) -> int | None:
        for size, d in zip(self.sizes[1:], self.differences):
            if abs(d) < self.tolerance:
                return size
        return None


def conditional_entropy_limit(
    rho: DensityState,
    region: Iterable[int],
    ladder: Iterable[Iterable[int]],
    tolerance: float = 1e-6,
    slack: float = 1e-9,
) -> ConvergenceSeries:
    """``S_{I u L_k} - S_{L_k}`` along an increasing ladder of conditioning regions ``L_k``.

    Strong subadditivity makes the series non-increasing; a violation beyond
    ``slack`` raises :class:`InvariantViolation`.
    """
    i = as_sites(region)
    series = ConvergenceSeries(tolerance=tolerance)
    previous: set[int] = set()
    for lam in ladder:
        lam = as_sites(lam)
        if not previous <= set(lam):
            raise PreconditionError("conditioning regions must be nested")
        previous = set(lam)
        series.sizes.append(len(lam))
        series.values.append(conditional_entropy(rho, i, lam))
    if not series.is_monotone(slack):
        raise InvariantViolation(f"conditional entropy series not monotone: {series.values}")
    return series


def symmetric_ladder(rho: DensityState, region: Iterable[int]) -> list[tuple[int, ...]]:
    """Conditioning regions ``[lo-k, hi+k] \\ I`` for ``k = 0, 1, ...`` inside the state's support."""
    i = as_sites(region)
    lo, hi = min(i), max(i)
    out = []
    k = 0
    while True:
        block = [s for s in range(lo - k, hi + k + 1) if s in rho.sites and s not in i]
        if out and set(block) == set(out[-1]):
            break
        out.append(tuple(block))
        k += 1
    return out


@dataclass
class DonaldReport:
    mutual: float
    relative_to_product: float
    left_relative: float
    right_relative: float

    @property
    def residual(self) -> float:
        return abs(self.mutual - self.relative_to_product + self.left_relative + self.right_relative)


def _require_faithful(*states: DensityState) -> None:
    for s in states:
        if s.min_eigenvalue() <= 1e-12:
            raise DomainError(f"state on {s.sites} is not faithful")


def donald_decompose(
    varpi: DensityState, rho_left: DensityState, rho_right: DensityState
) -> DonaldReport:
    """The four terms of ``I(L:R) = S(w | r_L (x) r_R) - S(w_L | r_L) - S(w_R | r_R)``.

    ``L`` and ``R`` are the site sets of ``rho_left`` and ``rho_right``; they must
    partition the support of ``varpi``.
    """
    _require_faithful(varpi, rho_left, rho_right)
    left, right = rho_left.sites, rho_right.sites
    if as_sites(left + right) != varpi.sites:
        raise PreconditionError("rho_left and rho_right must partition the support of varpi")
    if varpi.is_fermion:
        for s in (varpi, rho_left, rho_right):
            if s.parity_flag is not ParityFlag.EVEN:
                raise PreconditionError("fermionic Donald decomposition needs even states")
    return DonaldReport(
        mutual=mutual_entropy(varpi, left, right),
        relative_to_product=relative_entropy(varpi, product_extend(rho_left, rho_right)),
        left_relative=relative_entropy(reduce(varpi, left), rho_left),
        right_relative=relative_entropy(reduce(varpi, right), rho_right),
    )


def pinsker_gap(rho: DensityState, sigma: DensityState) -> float:
    """``2 S(rho | sigma) - ||rho - sigma||_1^2``."""
    s = relative_entropy(rho, sigma)
    if math.isinf(s):
        return math.inf
    return 2 * s - trace_distance(rho, sigma) ** 2


def ssa_gap(rho: DensityState, x: Iterable[int], y: Iterable[int]) -> float:
    """``S_X + S_Y - S_{X n Y} - S_{X u Y}``."""
    x, y = set(as_sites(x)), set(as_sites(y))
    return von_neumann(rho, x) + von_neumann(rho, y) - von_neumann(rho, x & y) - von_neumann(rho, x | y)


@dataclass
class EntropyBoundsReport:
    entropy: float
    conditional: float
    mutual: float
    triangle_slack: float
    twice_entropy_slack: float
    monotone_slack: float | None
    skipped: bool = False
    warning: str = ""

    def slacks(self) -> dict[str, float]:
        out = {"triangle": self.triangle_slack, "twice_entropy": self.twice_entropy_slack}
        if self.monotone_slack is not None:
            out["monotone"] = self.monotone_slack
        return out


def entropy_bounds_check(
    rho: DensityState, region: Iterable[int], condition: Iterable[int], smaller: Iterable[int] | None = None
) -> EntropyBoundsReport:
    """``|S_{I|J}| <= S_I``, ``I(I:J) <= 2 S_I`` and, if ``smaller`` is a subset of ``J``,
    ``I(I:smaller) <= I(I:J)``.

    Non-even fermionic states are not covered by these bounds; the report is
    returned with ``skipped=True``.
    """
    i, j = as_sites(region), as_sites(condition)
    _disjoint(i, j)
    s_i = von_neumann(rho, i)
    cond = conditional_entropy(rho, i, j)
    mut = s_i - cond
    report = EntropyBoundsReport(s_i, cond, mut, s_i - abs(cond), 2 * s_i - mut, None)
    if smaller is not None:
        k = as_sites(smaller)
        if not set(k) <= set(j):
            raise PreconditionError("monotonicity check needs the smaller region inside J")
        report.monotone_slack = mut - mutual_entropy(rho, i, k) if k else mut
    if rho.statistics is Statistics.FERMION and rho.parity_flag is not ParityFlag.EVEN:
        report.skipped = True
        report.warning = "non-even fermionic state: bounds not guaranteed"
    return report
