import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigvalsh, expm

from thermal_arealaw.entropy import mutual_entropy, von_neumann
from thermal_arealaw.errors import DomainError, PreconditionError, UnsupportedModelError
from thermal_arealaw.gaussian import (
    BdGHamiltonian,
    MajoranaCovariance,
    bdg_from_potential,
    gaussian_entropy,
    gaussian_mutual,
    thermal_covariance,
    thermal_destruction_scan,
)
from thermal_arealaw.lattice import Statistics, majorana_operators, site_operator
from thermal_arealaw.potential import ModelSpec, Potential, Term, coupling_norm, kitaev, tfim, window_hamiltonian
from thermal_arealaw.states import gibbs_state

from conftest import fermion_window

LOG2 = math.log(2)


def test_kitaev_two_site_bdg_entries():
    t, delta, mu = 0.8, 0.5, 0.3
    h = bdg_from_potential(kitaev(t, delta, mu), 2)
    assert np.allclose(h.hopping, [[-mu, -t], [-t, -mu]])
    assert np.allclose(h.pairing, [[0, -delta], [delta, 0]])
    assert h.constant == pytest.approx(0)


def test_pure_hopping_has_no_pairing():
    h = bdg_from_potential(kitaev(1.0, 0.0, 0.4), 5)
    assert np.allclose(h.pairing, 0)


@pytest.mark.parametrize("params", [(1.0, 1.0, 0.5), (0.7, 0.3, -1.2), (1.0, 0.0, 0.2)])
def test_many_body_spectrum_matches_ed(params):
    phi = kitaev(*params)
    w = fermion_window(4)
    ed = np.sort(eigvalsh(window_hamiltonian(phi, w)))
    assert np.allclose(bdg_from_potential(phi, 4).many_body_spectrum(), ed, atol=1e-12)


def test_quadratic_form_reconstructs_hamiltonian():
    phi = kitaev(1.0, 0.6, 0.9)
    n = 3
    h = bdg_from_potential(phi, n)
    gam = majorana_operators(n)
    a = h.majorana_matrix
    rebuilt = h.constant * np.eye(2**n) + 0.25j * sum(a[k, l] * gam[k] @ gam[l] for k in range(2 * n) for l in range(2 * n))
    assert np.allclose(rebuilt, window_hamiltonian(phi, fermion_window(n)))


def test_bdg_roundtrip_and_validation(rng):
    a = rng.normal(size=(6, 6))
    a = a - a.T
    h = BdGHamiltonian.from_majorana(a)
    assert np.allclose(h.majorana_matrix, a)
    with pytest.raises(PreconditionError):
        BdGHamiltonian(np.array([[0, 1], [0, 0]]), np.zeros((2, 2)))
    with pytest.raises(PreconditionError):
        BdGHamiltonian(np.eye(2), np.ones((2, 2)))


def test_non_quadratic_rejected():
    w = fermion_window(2)
    nn = site_operator(w, 0, "n") @ site_operator(w, 1, "n")
    interacting = Potential((Term((0, 1), nn),), Statistics.FERMION, "density-density")
    with pytest.raises(UnsupportedModelError):
        bdg_from_potential(interacting, 4)
    with pytest.raises(UnsupportedModelError):
        bdg_from_potential(tfim(), 4)


def test_high_temperature_covariance_vanishes():
    cov = thermal_covariance(bdg_from_potential(kitaev(), 6), 1e-9)
    assert np.max(np.abs(cov.matrix)) < 1e-8


@pytest.mark.parametrize("eps, beta", [(0.7, 1.0), (-1.3, 2.0), (2.0, 0.25)])
def test_single_mode_fermi_dirac(eps, beta):
    # H = eps (n - 1/2): Gamma_01 = 2<n> - 1
    h = BdGHamiltonian(np.array([[eps]]), np.zeros((1, 1)))
    cov = thermal_covariance(h, beta)
    occupation = 1 / (1 + math.exp(beta * eps))
    assert (cov.matrix[0, 1] + 1) / 2 == pytest.approx(occupation, abs=1e-14)


def test_covariance_matches_ed_two_point_functions():
    phi = kitaev(1.0, 1.0, 0.5)
    n = 6
    g = gibbs_state(phi, fermion_window(n).region(), 1.0)
    gam = majorana_operators(n)
    cov = thermal_covariance(bdg_from_potential(phi, n), 1.0).matrix
    ed = np.array([[(0.5j * g.expect(gam[k] @ gam[l] - gam[l] @ gam[k])).real for l in range(2 * n)] for k in range(2 * n)])
    assert np.max(np.abs(cov - ed)) <= 1e-10


def test_entropy_trivial_cases():
    assert gaussian_entropy(MajoranaCovariance(np.zeros((8, 8))), range(3)) == pytest.approx(3 * LOG2)
    pure = thermal_covariance(bdg_from_potential(kitaev(1.0, 1.0, 0.5), 6), math.inf)
    assert pure.zero_modes == 0
    assert gaussian_entropy(pure, range(6)) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 5.0])
def test_entropy_matches_ed(beta):
    phi = kitaev(1.0, 1.0, 0.5)
    n = 8
    g = gibbs_state(phi, fermion_window(n).region(), beta)
    cov = thermal_covariance(bdg_from_potential(phi, n), beta)
    assert gaussian_entropy(cov, range(4)) == pytest.approx(von_neumann(g, range(4)), abs=1e-6)
    assert gaussian_mutual(cov, range(4), range(4, 8)) == pytest.approx(mutual_entropy(g, range(4), range(4, 8)), abs=1e-6)


def test_mutual_trivial_cases():
    a = np.zeros((8, 8))
    a[:4, :4] = np.array([[0, 0.3, 0, 0], [-0.3, 0, 0.1, 0], [0, -0.1, 0, 0.2], [0, 0, -0.2, 0]])
    a[4:, 4:] = a[:4, :4]
    cov = MajoranaCovariance(a)
    assert gaussian_mutual(cov, (0, 1), (2, 3)) == pytest.approx(0, abs=1e-14)
    assert gaussian_mutual(MajoranaCovariance(np.zeros((8, 8))), (0, 1), (2, 3)) == pytest.approx(0, abs=1e-14)
    with pytest.raises(PreconditionError):
        gaussian_mutual(cov, (0, 1), (1, 2))


def test_invalid_covariance():
    with pytest.raises(DomainError):
        MajoranaCovariance(np.ones((2, 2)))
    bad = MajoranaCovariance(np.array([[0, 2.0], [-2.0, 0]]))
    with pytest.raises(DomainError):
        bad.check()
    with pytest.raises(DomainError):
        gaussian_entropy(bad, (0,))
    with pytest.raises(DomainError):
        thermal_covariance(bdg_from_potential(kitaev(), 2), -1.0)


def test_zero_modes_flagged_at_zero_temperature(caplog):
    # mu = 0, delta = t: two exact Majorana edge modes
    cov = thermal_covariance(bdg_from_potential(kitaev(1.0, 1.0, 0.0), 6), math.inf)
    assert cov.zero_modes == 2
    assert "degenerate" in caplog.text


@settings(max_examples=20, deadline=None)
@given(
    st.floats(0.2, 2.0),
    st.floats(0.0, 1.5),
    st.floats(-2.5, 2.5),
    st.floats(0.1, 5.0),
)
def test_validity_and_monotone_mutual(t, delta, mu, beta):
    n = 10
    cov = thermal_covariance(bdg_from_potential(kitaev(t, delta, mu), n), beta)
    for sites in (range(3), range(2, 7), range(n)):
        assert np.linalg.svd(cov.restrict(sites), compute_uv=False).max() <= 1 + 1e-10
    values = [gaussian_mutual(cov, range(3), range(3, 3 + k)) for k in range(1, 8)]
    assert values[0] >= -1e-8
    assert all(b >= a - 1e-8 for a, b in zip(values, values[1:]))


def test_scan_gapped_ground_state_saturates():
    scan = thermal_destruction_scan(ModelSpec("kitaev", {"t": 1, "delta": 1, "mu": 3}), [math.inf], [16, 32, 64])
    series = scan.series[math.inf]
    assert series.saturated
    assert series.label() == "saturating"


def test_scan_critical_growth_and_thermal_saturation():
    spec = ModelSpec("kitaev", {"t": 1, "delta": 1, "mu": 2})
    scan = thermal_destruction_scan(spec, [math.inf, 2.0], [32, 64, 128])
    cold, warm = scan.series[math.inf], scan.series[2.0]
    assert cold.strictly_increasing and not cold.saturated
    assert "not a verified infinity" in cold.label()
    assert warm.saturated and max(warm.values) <= 2 * 2.0 * coupling_norm(spec.potential()) + 1e-6
    assert len(scan.table()) == 6
