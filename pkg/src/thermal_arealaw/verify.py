"""Finite-window checks of the thermal-equilibrium inequalities and product formulas.

Every check works on a window ``W``; the infinite complement ``I^c`` of a region is
replaced by ``W \\ I`` and reports carry the window size and a truncation flag
whenever a surface energy is cut by the window edge.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .entropy import ConvergenceSeries, conditional_entropy, mutual_entropy, relative_entropy, von_neumann
from .errors import DomainError, InvariantViolation, PreconditionError
from .lattice import LocalOperator, Region, Statistics, Window, as_sites
from .linalg import LOG_FLOOR, eigh, operator_norm, trace_norm
from .potential import (
    Potential,
    boundary_bonds,
    coupling_norm,
    half_chain_coupling,
    inner_hamiltonian,
    max_term_norm,
    open_hamiltonian,
    surface_energy,
    window_hamiltonian,
)
from .states import (
    DensityState,
    depolarizing_channel,
    gibbs_from_hamiltonian,
    gibbs_state,
    ground_state,
    identity_channel,
    lts_trial,
    parity_residual,
    perturb,
    product_extend,
    random_local_channel,
    reduce,
)

log = logging.getLogger(__name__)

SLACK_TOL = 1e-9


def _window_of(state: DensityState) -> Window:
    lo, hi = state.sites[0], state.sites[-1]
    if hi - lo + 1 != state.n_sites:
        raise PreconditionError("state does not live on a contiguous window")
    return Window(lo, hi, state.statistics)


def window_gibbs(phi: Potential, window: Window, beta: float) -> DensityState:
    return gibbs_state(phi, window.region(), beta)


def _complement(window: Window, region: Iterable[int]) -> tuple[int, ...]:
    r = set(region)
    return tuple(s for s in window.sites if s not in r)


def free_energy(state: DensityState, h: np.ndarray, beta: float) -> float:
    return state.expect(h).real - von_neumann(state) / beta


def conditional_free_energy(psi: DensityState, region: Iterable[int], phi: Potential, beta: float) -> float:
    """``psi(H_I + H_dI) - S_{I|W\\I}(psi) / beta`` on the window carrying ``psi``."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    window = _window_of(psi)
    sites = as_sites(region)
    h_open = open_hamiltonian(phi, Region(sites, window), window).matrix
    s_cond = conditional_entropy(psi, sites, _complement(window, sites))
    return psi.expect(h_open).real - s_cond / beta


@dataclass
class LTSReport:
    F_phi: float
    trial_results: list[tuple[str, float, float]] = field(default_factory=list)
    window_size: int = 0

    @property
    def min_margin(self) -> float:
        return min((m for _, _, m in self.trial_results), default=math.inf)


def lts_check(
    phi: Potential,
    beta: float,
    window: Window,
    region: Iterable[int],
    n_trials: int = 100,
    rng: np.random.Generator | None = None,
    state: DensityState | None = None,
    marginal_tol: float = 1e-12,
) -> LTSReport:
    """Compare ``F_I(phi)`` with ``F_I(psi)`` for trial states built by local channels on ``I``.

    The first two trials are the identity and the complete depolarization of ``I``;
    the remaining ``n_trials`` are random unitary mixtures followed by dephasing or
    partial depolarization.
    """
    rng = rng or np.random.default_rng(0)
    sites = as_sites(region)
    phi_state = state or window_gibbs(phi, window, beta)
    ext = _complement(window, sites)
    f_phi = conditional_free_energy(phi_state, sites, phi, beta)
    report = LTSReport(f_phi, window_size=window.n_sites)
    ext_ref = reduce(phi_state, ext).matrix if ext else None
    channels = [identity_channel(sites, window.statistics), depolarizing_channel(sites, 1.0, window.statistics)]
    channels += [random_local_channel(sites, rng, window.statistics) for _ in range(n_trials)]
    for k, ch in enumerate(channels):
        psi = lts_trial(phi_state, sites, ch)
        if ext_ref is not None:
            drift = float(np.max(np.abs(reduce(psi, ext).matrix - ext_ref)))
            if drift > marginal_tol:
                raise InvariantViolation(f"trial {k} ({ch.label}) changed the exterior marginal by {drift:.2e}")
        f_psi = conditional_free_energy(psi, sites, phi, beta)
        report.trial_results.append((f"{k}:{ch.label}", f_psi, f_psi - f_phi))
    return report


@dataclass
class AreaLawReport:
    mutual: float
    energy_gap_term: float
    norm_bound: float
    geometric_bound: float
    boundary_norm: float
    boundary_bonds: int
    truncation_flag: bool
    window_size: int
    monotone_slack: float | None = None

    @property
    def slack1(self) -> float:
        return self.energy_gap_term - self.mutual

    @property
    def slack2(self) -> float:
        return self.norm_bound - self.energy_gap_term

    @property
    def geometric_slack(self) -> float:
        return self.geometric_bound - self.mutual

    def slacks(self) -> dict[str, float]:
        out = {"slack1": self.slack1, "slack2": self.slack2, "geometric": self.geometric_slack}
        if self.monotone_slack is not None:
            out["monotone"] = self.monotone_slack
        return out

    def holds(self, tol: float = SLACK_TOL) -> bool:
        return all(v >= -tol for v in self.slacks().values())


def area_law_chain(
    phi: Potential,
    beta: float,
    window: Window,
    region: Iterable[int],
    smaller: Iterable[int] | None = None,
    state: DensityState | None = None,
) -> AreaLawReport:
    """Evaluate ``I(A:B) <= I(A:W\\A) <= beta (phi_A (x) phi_B - phi)(H_dA) <= 2 beta ||H_dA||``.

    ``B`` defaults to the sites of ``W \\ A`` adjacent to ``A``. The geometric bound
    is ``2 beta c_Phi |dA|`` with ``c_Phi`` the largest base-term norm and ``|dA|``
    the number of crossing terms.
    """
    sites = as_sites(region)
    ext = _complement(window, sites)
    if not sites or not ext:
        raise PreconditionError("area law needs a proper non-empty region")
    phi_state = state or window_gibbs(phi, window, beta)
    rho_a, rho_b = reduce(phi_state, sites), reduce(phi_state, ext)
    prod = product_extend(rho_a, rho_b)
    surf = surface_energy(phi, Region(sites, window), window)
    h = surf.operator.matrix
    gap = beta * (prod.expect(h) - phi_state.expect(h)).real
    s_a = von_neumann(rho_a)
    mutual = s_a + von_neumann(rho_b) - von_neumann(phi_state)
    bonds = boundary_bonds(phi, Region(sites, window), window)
    report = AreaLawReport(
        mutual=mutual,
        energy_gap_term=gap,
        norm_bound=2 * beta * surf.norm,
        geometric_bound=2 * beta * max_term_norm(phi) * bonds,
        boundary_norm=surf.norm,
        boundary_bonds=bonds,
        truncation_flag=surf.truncated,
        window_size=window.n_sites,
    )
    if smaller is None:
        smaller = [s for s in ext if min(abs(s - a) for a in sites) == 1]
    smaller = as_sites(smaller)
    if not set(smaller) <= set(ext):
        raise PreconditionError("B must lie outside A")
    if smaller:
        report.monotone_slack = mutual - mutual_entropy(phi_state, sites, smaller)
    return report


def free_energy_minimality(phi: Potential, beta: float, window: Window, region: Iterable[int]) -> float:
    """``F(phi_A (x) phi_B) - F(phi)`` for the window Gibbs state; non-negative."""
    sites = as_sites(region)
    state = window_gibbs(phi, window, beta)
    prod = product_extend(reduce(state, sites), reduce(state, _complement(window, sites)))
    h = window_hamiltonian(phi, window)
    return free_energy(prod, h, beta) - free_energy(state, h, beta)


@dataclass
class GibbsConditionResult:
    residual_a: float
    residual_b: float
    residual_oracle: float
    truncated: bool


def gibbs_condition_check(phi: Potential, beta: float, window: Window, region: Iterable[int]) -> GibbsConditionResult:
    """Perturb the window Gibbs state by ``beta H_dI`` and compare with the local Gibbs product.

    ``residual_a = ||psi_I - rho_I||_1``, ``residual_b = ||psi - rho_I (x) psi_{W\\I}||_1``;
    ``residual_oracle`` compares ``psi`` with ``exp(-beta (H_I + H_{W\\I}))`` normalized.
    """
    sites = as_sites(region)
    ext = _complement(window, sites)
    state = window_gibbs(phi, window, beta)
    surf = surface_energy(phi, Region(sites, window), window)
    psi = perturb(state, beta * surf.operator.matrix)
    local = gibbs_state(phi, Region(sites, window), beta)
    res_a = trace_norm(reduce(psi, sites).matrix - local.matrix)
    if ext:
        res_b = trace_norm(psi.matrix - product_extend(local, reduce(psi, ext)).matrix)
        h_split = inner_hamiltonian(phi, Region(sites, window)).matrix + inner_hamiltonian(phi, Region(ext, window)).matrix
    else:
        res_b = res_a
        h_split = inner_hamiltonian(phi, Region(sites, window)).matrix
    oracle = gibbs_from_hamiltonian(h_split, beta, window.sites, window.statistics)
    return GibbsConditionResult(res_a, res_b, trace_norm(psi.matrix - oracle.matrix), surf.truncated)


def _halves(window: Window, cut: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    left = tuple(s for s in window.sites if s < cut)
    right = tuple(s for s in window.sites if s >= cut)
    if not left or not right:
        raise PreconditionError(f"cut {cut} does not split window [{window.lo}, {window.hi}]")
    return left, right


def araki_gibbs_halves_check(phi: Potential, beta: float, window: Window, cut: int) -> float:
    """``||[phi^{beta W_LR}] - phi_L (x) phi_R||_1`` with ``phi_L``, ``phi_R`` the half-window Gibbs states."""
    left, right = _halves(window, cut)
    state = window_gibbs(phi, window, beta)
    w_lr = half_chain_coupling(phi, cut, window).operator.matrix
    psi = perturb(state, beta * w_lr)
    prod = product_extend(gibbs_state(phi, Region(left, window), beta), gibbs_state(phi, Region(right, window), beta))
    return trace_norm(psi.matrix - prod.matrix)


def _unitary(h: np.ndarray, t: float) -> np.ndarray:
    w, v = eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


@dataclass
class DynamicsResult:
    residuals: dict[float, float]
    commutator: float
    left_parity_residual: float
    right_parity_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def decoupled_dynamics_check(
    phi: Potential, window: Window, cut: int, t_grid: Sequence[float] = (0.1, 0.5, 1.0)
) -> DynamicsResult:
    """``||exp(it(H_W - W_LR)) - exp(it H_L) exp(it H_R)||`` per time, plus ``||[H_L, H_R]||``."""
    left, right = _halves(window, cut)
    h_w = window_hamiltonian(phi, window)
    w_lr = half_chain_coupling(phi, cut, window).operator.matrix
    h_l = inner_hamiltonian(phi, Region(left, window)).matrix
    h_r = inner_hamiltonian(phi, Region(right, window)).matrix
    residuals = {}
    for t in t_grid:
        lhs = _unitary(h_w - w_lr, t)
        rhs = _unitary(h_l, t) @ _unitary(h_r, t)
        residuals[float(t)] = operator_norm(lhs - rhs)
    n = window.n_sites
    fermion = window.statistics is Statistics.FERMION
    return DynamicsResult(
        residuals,
        operator_norm(h_l @ h_r - h_r @ h_l),
        parity_residual(h_l, n) if fermion else 0.0,
        parity_residual(h_r, n) if fermion else 0.0,
    )


@dataclass
class PerturbationBounds:
    forward: float  # S([w^h] | w)
    energy_shift: float  # [w^h](h) - w(h)
    backward: float  # S(w | [w^h])
    norm: float

    def slacks(self) -> dict[str, float]:
        return {
            "forward_le_shift": self.energy_shift - self.forward,
            "shift_le_2norm": 2 * self.norm - self.energy_shift,
            "backward_le_2norm": 2 * self.norm - self.backward,
        }


def perturbation_bound_check(omega: DensityState, h: np.ndarray | LocalOperator) -> PerturbationBounds:
    """Relative entropies between ``omega`` and its perturbation ``[omega^h]`` against ``2||h||``.

    With ``[omega^h] ~ exp(log D + h)`` one has
    ``S([w^h]|w) <= [w^h](h) - w(h) <= 2||h||`` and ``S(w|[w^h]) <= 2||h||``.
    """
    hm = h.matrix if isinstance(h, LocalOperator) else np.asarray(h)
    pert = perturb(omega, hm)
    return PerturbationBounds(
        forward=relative_entropy(pert, omega),
        energy_shift=(pert.expect(hm) - omega.expect(hm)).real,
        backward=relative_entropy(omega, pert),
        norm=operator_norm(hm),
    )


@dataclass
class CorrelationResult:
    covariance: float
    bound: float
    pinsker_lhs: float
    pinsker_bound: float

    @property
    def slack(self) -> float:
        return self.bound - abs(self.covariance)

    @property
    def pinsker_slack(self) -> float:
        return self.pinsker_bound - self.pinsker_lhs


def correlation_estimate_check(
    phi: Potential,
    beta: float,
    window: Window,
    region: Iterable[int],
    obs_a: LocalOperator | np.ndarray,
    obs_b: LocalOperator | np.ndarray,
    state: DensityState | None = None,
) -> CorrelationResult:
    """``|phi(O_A O_B) - phi(O_A) phi(O_B)| <= 2 sqrt(beta ||H_dA||)`` and the Pinsker-level bound."""
    sites = as_sites(region)
    a = obs_a.matrix if isinstance(obs_a, LocalOperator) else np.asarray(obs_a)
    b = obs_b.matrix if isinstance(obs_b, LocalOperator) else np.asarray(obs_b)
    for name, m in (("O_A", a), ("O_B", b)):
        if operator_norm(m) > 1 + 1e-12:
            raise PreconditionError(f"{name} has norm {operator_norm(m):.3g} > 1")
    state = state or window_gibbs(phi, window, beta)
    ext = _complement(window, sites)
    cov = state.expect(a @ b) - state.expect(a) * state.expect(b)
    surf = surface_energy(phi, Region(sites, window), window)
    prod = product_extend(reduce(state, sites), reduce(state, ext))
    return CorrelationResult(
        covariance=float(abs(cov)),
        bound=2 * math.sqrt(beta * surf.norm),
        pinsker_lhs=trace_norm(prod.matrix - state.matrix) ** 2,
        pinsker_bound=4 * beta * surf.norm,
    )


@dataclass
class GroundStateReport:
    mutual: float
    entropy: float
    degeneracy: int
    gap: float
    ladder: list[tuple[int, float]]
    skipped: bool = False

    @property
    def residual(self) -> float:
        return abs(self.mutual - 2 * self.entropy)


def ground_state_mutual_check(phi: Potential, window: Window, region: Iterable[int]) -> GroundStateReport:
    """``I(A:W\\A) = 2 S_A`` for a non-degenerate window ground state, with the prefix-block entropy ladder."""
    sites = as_sites(region)
    gs = ground_state(phi, window.region())
    if gs.degeneracy > 1:
        log.warning("ground state of %s on %d sites is %d-fold degenerate; skipped", phi.name, window.n_sites, gs.degeneracy)
        return GroundStateReport(math.nan, math.nan, gs.degeneracy, gs.gap, [], skipped=True)
    ext = _complement(window, sites)
    s_a = von_neumann(gs.state, sites)
    mutual = s_a + von_neumann(gs.state, ext) - von_neumann(gs.state)
    ladder = [(ell, von_neumann(gs.state, window.sites[:ell])) for ell in range(1, window.n_sites)]
    return GroundStateReport(mutual, s_a, gs.degeneracy, gs.gap, ladder)


def relative_entropy_to_product(state: DensityState, left: DensityState, right: DensityState) -> float:
    """``S(state | left (x) right)`` using ``log(left (x) right) = log left (x) 1 + 1 (x) log right``.

    Valid for spins and, for even fermionic ``left``/``right``, the CAR product across a cut.
    """
    def cross(marginal: DensityState, ref: DensityState) -> float:
        q, w = eigh(ref.matrix)
        weights = np.einsum("ij,ik,kj->j", w.conj(), marginal.matrix, w).real
        return float(weights @ np.log(np.maximum(q, LOG_FLOOR)))

    s = von_neumann(state)
    return -s - cross(reduce(state, left.sites), left) - cross(reduce(state, right.sites), right)


@dataclass
class HalvesReport:
    series: ConvergenceSeries
    bound: float
    donald_values: list[float]
    windows: list[tuple[int, int]]

    @property
    def max_value(self) -> float:
        return max(self.series.values, default=0.0)

    def bound_slacks(self) -> list[float]:
        return [self.bound - v for v in self.series.values]

    def donald_slacks(self) -> list[float]:
        return [self.bound - v for v in self.donald_values]

    @property
    def monotone_slack(self) -> float:
        return min(self.series.differences, default=0.0)

    @property
    def converged(self) -> bool:
        return self.series.converged


def halves_mutual_series(
    phi: Potential, beta: float, ks: Iterable[int], cut: int = 0, tolerance: float = 1e-4
) -> HalvesReport:
    """``I(left : right)`` of the Gibbs state on windows ``[cut-k, cut+k-1]``.

    Each term is compared with ``2 beta ||W_LR||``; the Donald route value
    ``S(phi | phi^L (x) phi^R)`` of the same window is reported alongside.
    """
    bound = 2 * beta * coupling_norm(phi, cut)
    series = ConvergenceSeries(tolerance=tolerance, direction="non-decreasing")
    donald, windows = [], []
    for k in ks:
        window = Window(cut - k, cut + k - 1, phi.statistics)
        left, right = _halves(window, cut)
        state = window_gibbs(phi, window, beta)
        series.sizes.append(window.n_sites)
        series.values.append(mutual_entropy(state, left, right))
        g_l = gibbs_state(phi, Region(left, window), beta)
        g_r = gibbs_state(phi, Region(right, window), beta)
        donald.append(relative_entropy_to_product(state, g_l, g_r))
        windows.append((window.lo, window.hi))
    return HalvesReport(series, bound, donald, windows)
