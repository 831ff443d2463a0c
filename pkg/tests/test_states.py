import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from thermal_arealaw.entropy import mutual_entropy, relative_entropy
from thermal_arealaw.errors import ContractError, DomainError, PreconditionError, UnsupportedExtensionError
from thermal_arealaw.lattice import Statistics, Window, X, site_operator
from thermal_arealaw.potential import inner_hamiltonian, kitaev, tfim, window_hamiltonian, zero_potential
from thermal_arealaw.states import (
    DensityState,
    ParityFlag,
    depolarizing_channel,
    gibbs_from_hamiltonian,
    gibbs_state,
    ground_state,
    identity_channel,
    is_even,
    lts_trial,
    perturb,
    product_extend,
    pure_state,
    random_local_channel,
    random_state,
    random_unitary_channel,
    reduce,
    reduce_by_monomials,
    tracial_state,
)

from conftest import fermion_window


def expm_gibbs(h, beta):
    d = expm(-beta * h)
    return d / np.trace(d)


def test_density_state_validation():
    with pytest.raises(ContractError):
        DensityState(np.eye(2), (0,))
    with pytest.raises(ContractError):
        DensityState(np.eye(4) / 4, (0,))


def test_gibbs_high_temperature_is_tracial():
    w = Window(0, 3)
    g = gibbs_state(tfim(), w.region(), 1e-8)
    assert np.max(np.abs(g.matrix - np.eye(16) / 16)) <= 1e-6


def test_gibbs_single_spin_closed_form():
    g = gibbs_from_hamiltonian(-X, 1.0, (0,))
    plus = np.array([1, 1]) / np.sqrt(2)
    assert plus @ g.matrix @ plus == pytest.approx(np.e / (np.e + 1 / np.e))


@pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
def test_gibbs_matches_expm_oracle(beta):
    w = Window(0, 3)
    h = window_hamiltonian(tfim(), w)
    g = gibbs_state(tfim(), w.region(), beta)
    assert np.allclose(g.matrix, expm_gibbs(h, beta), atol=1e-13)
    assert g.expect(h).real == pytest.approx(np.trace(expm_gibbs(h, beta) @ h).real, abs=1e-12)


def test_gibbs_on_subregion_uses_region_hamiltonian():
    w = Window(0, 5)
    g = gibbs_state(tfim(), w.region([1, 2, 3]), 0.7)
    h = inner_hamiltonian(tfim(), Window(1, 3).region()).matrix
    assert g.sites == (1, 2, 3)
    assert np.allclose(g.matrix, expm_gibbs(h, 0.7))


def test_gibbs_rejects_bad_beta():
    with pytest.raises(DomainError):
        gibbs_from_hamiltonian(np.eye(2), 0.0, (0,))
    with pytest.raises(DomainError):
        gibbs_from_hamiltonian(np.eye(2), np.inf, (0,))


def test_ground_state_large_field():
    w = Window(0, 3)
    gs = ground_state(tfim(1.0, 100.0), w.region())
    plus = np.ones(16) / 4
    assert gs.degeneracy == 1
    assert plus @ gs.state.matrix @ plus >= 1 - 1e-3


def test_ground_state_close_to_cold_gibbs():
    w = Window(0, 5)
    gs = ground_state(tfim(1.0, 2.0), w.region())
    cold = gibbs_state(tfim(1.0, 2.0), w.region(), 50.0)
    assert relative_entropy(gs.state, cold) <= 1e-4


def test_ground_state_of_zero_potential_is_tracial():
    gs = ground_state(zero_potential(), Window(0, 2).region())
    assert gs.degeneracy == 8
    assert np.allclose(gs.state.matrix, np.eye(8) / 8)


def test_reduce_product_and_tracial(rng):
    a = random_state((0, 1), rng)
    b = random_state((2,), rng)
    prod = product_extend(a, b)
    assert np.allclose(reduce(prod, (0, 1)).matrix, a.matrix)
    assert np.allclose(reduce(prod, (2,)).matrix, b.matrix)
    t = tracial_state(range(4))
    assert np.allclose(reduce(t, (0, 3)).matrix, np.eye(4) / 4)


@pytest.mark.parametrize("region", [(0, 2), (1, 3), (0, 3), (2,), (1, 2, 3)])
def test_fermion_reduce_matches_monomial_oracle(region, rng):
    rho = random_state(range(4), rng, Statistics.FERMION, even=True)
    assert rho.parity_flag is ParityFlag.EVEN
    fast = reduce(rho, region)
    assert np.max(np.abs(fast.matrix - reduce_by_monomials(rho, region).matrix)) <= 1e-12


def test_fermion_reduce_preserves_expectations(rng):
    # the reduced state reproduces even moments of the parent on the region
    rho = random_state(range(4), rng, Statistics.FERMION, even=True)
    red = reduce(rho, (0, 2))
    big, small = fermion_window(4), fermion_window(2)
    for (a, b), (a2, b2) in [((0, 2), (0, 1)), ((2, 0), (1, 0)), ((2, 2), (1, 1))]:
        op_big = site_operator(big, a, "cdag") @ site_operator(big, b, "c")
        op_small = site_operator(small, a2, "cdag") @ site_operator(small, b2, "c")
        assert rho.expect(op_big) == pytest.approx(red.expect(op_small), abs=1e-12)


def test_product_extend_tracial():
    t = product_extend(tracial_state((0,)), tracial_state((1, 2)))
    assert np.allclose(t.matrix, np.eye(8) / 8)


@pytest.mark.parametrize("stats", list(Statistics))
def test_product_extend_noncontiguous_factorizes(stats, rng):
    even = stats is Statistics.FERMION
    a = random_state((0, 2), rng, stats, even=even)
    b = random_state((1, 3), rng, stats, even=even)
    prod = product_extend(a, b)
    assert prod.sites == (0, 1, 2, 3)
    assert np.allclose(reduce(prod, (0, 2)).matrix, a.matrix)
    assert np.allclose(reduce(prod, (1, 3)).matrix, b.matrix)
    assert mutual_entropy(prod, (0, 2), (1, 3)) == pytest.approx(0, abs=1e-12)


def test_fermion_product_factorizes_on_even_monomials(rng):
    # phi(A B) = phi_a(A) phi_b(B) for even A on {0, 2} and even B on {1}
    a = random_state((0, 2), rng, Statistics.FERMION, even=True)
    b = random_state((1,), rng, Statistics.FERMION, even=True)
    prod = product_extend(a, b)
    w3, w2, w1 = fermion_window(3), fermion_window(2), fermion_window(1)

    def op(w, *factors):
        out = np.eye(w.dim)
        for site, name in factors:
            out = out @ site_operator(w, site, name)
        return out

    monomials_a = [
        (((0, "n"),), ((0, "n"),)),
        (((0, "cdag"), (2, "c")), ((0, "cdag"), (1, "c"))),
        (((0, "c"), (2, "c")), ((0, "c"), (1, "c"))),
        (((0, "n"), (2, "n")), ((0, "n"), (1, "n"))),
    ]
    op_b3, op_b1 = op(w3, (1, "n")), op(w1, (0, "n"))
    for big, small in monomials_a:
        lhs = prod.expect(op(w3, *big) @ op_b3)
        assert lhs == pytest.approx(a.expect(op(w2, *small)) * b.expect(op_b1), abs=1e-12)


def test_product_extend_rejects_odd_fermion_state():
    v = np.array([1, 1]) / np.sqrt(2)
    odd = pure_state(v, (0,), Statistics.FERMION)
    assert odd.parity_flag is ParityFlag.NON_EVEN
    with pytest.raises(UnsupportedExtensionError):
        product_extend(odd, tracial_state((1,), Statistics.FERMION))


def test_product_extend_rejects_overlap(rng):
    with pytest.raises(PreconditionError):
        product_extend(random_state((0, 1), rng), random_state((1,), rng))


def test_perturb_matches_exponent_arithmetic():
    w = Window(0, 3)
    phi = tfim()
    h = window_hamiltonian(phi, w)
    v = site_operator(w, 1, "Z") @ site_operator(w, 2, "Z")
    g = gibbs_state(phi, w.region(), 0.8)
    assert np.allclose(perturb(g, 0.8 * v).matrix, expm_gibbs(h - v, 0.8), atol=1e-12)


def test_perturb_cold_gibbs_uses_exact_log():
    # at beta = 20 the smallest eigenvalues underflow; the Gibbs log is still exact
    w = Window(0, 5)
    phi = tfim()
    h = window_hamiltonian(phi, w)
    v = site_operator(w, 2, "Z") @ site_operator(w, 3, "Z")
    g = gibbs_state(phi, w.region(), 20.0)
    assert g.min_eigenvalue() < 1e-12
    assert np.allclose(perturb(g, 20.0 * v).matrix, expm_gibbs(h - v, 20.0), atol=1e-12)


def test_perturb_trivial_cases(rng):
    rho = random_state((0, 1), rng)
    assert np.allclose(perturb(rho, np.zeros((4, 4))).matrix, rho.matrix)
    assert np.allclose(perturb(rho, 3.7 * np.eye(4)).matrix, rho.matrix)


def test_perturb_preconditions(rng):
    rho = random_state((0,), rng)
    with pytest.raises(ContractError):
        perturb(rho, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ContractError):
        perturb(rho, np.eye(4))
    with pytest.raises(DomainError):
        perturb(pure_state(np.array([1, 0]), (0,)), np.eye(2))


def test_perturb_agrees_with_logm(rng):
    rho = random_state((0, 1), rng)
    h = rng.normal(size=(4, 4))
    h = h + h.T
    d = expm(logm(rho.matrix) + h)
    assert np.allclose(perturb(rho, h).matrix, d / np.trace(d))


def test_identity_and_depolarizing_channels(rng):
    rho = random_state(range(3), rng)
    assert np.allclose(identity_channel((1,)).apply(rho).matrix, rho.matrix)
    dep = depolarizing_channel((1,)).apply(rho)
    expected = product_extend(tracial_state((1,)), reduce(rho, (0, 2)))
    assert np.allclose(dep.matrix, expected.matrix)


@pytest.mark.parametrize("stats", list(Statistics))
def test_random_channels_preserve_exterior(stats, rng):
    even = stats is Statistics.FERMION
    rho = random_state(range(4), rng, stats, even=even)
    ref = reduce(rho, (0, 3)).matrix
    worst = 0.0
    for _ in range(100):
        out = lts_trial(rho, (1, 2), random_unitary_channel((1, 2), rng, stats))
        worst = max(worst, np.max(np.abs(reduce(out, (0, 3)).matrix - ref)))
    assert worst <= 1e-12


def test_random_local_channel_keeps_even_states_even(rng):
    rho = random_state(range(3), rng, Statistics.FERMION, even=True)
    for _ in range(20):
        out = random_local_channel((0, 2), rng, Statistics.FERMION).apply(rho)
        assert is_even(out)[1] <= 1e-13


def test_parity_examples(rng):
    w = fermion_window(3)
    assert gibbs_state(kitaev(1, 0.5, 0.2), w.region(), 1.0).parity_flag is ParityFlag.EVEN
    assert tracial_state(range(2), Statistics.FERMION).parity_flag is ParityFlag.EVEN
    assert not is_even(pure_state(np.array([1, 1]), (0,), Statistics.FERMION))[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(0,), (1,), (0, 2), (1, 2)]))
def test_reduce_is_positive_and_normalized(seed, region):
    rho = random_state(range(3), np.random.default_rng(seed), Statistics.FERMION, even=True)
    red = reduce(rho, region)
    assert red.min_eigenvalue() >= -1e-13
    assert np.trace(red.matrix).real == pytest.approx(1.0)
