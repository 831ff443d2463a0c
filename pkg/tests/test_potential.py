import numpy as np
import pytest
from scipy.linalg import eigvalsh

from thermal_arealaw.errors import ContractError, PreconditionError
from thermal_arealaw.lattice import Statistics, Window, site_operator
from thermal_arealaw.potential import (
    ModelSpec,
    Term,
    Potential,
    coupling_norm,
    decoupled_potential,
    half_chain_coupling,
    inner_hamiltonian,
    kitaev,
    materialize_term,
    max_term_norm,
    open_hamiltonian,
    surface_energy,
    tfim,
    window_hamiltonian,
    xxz,
)

from conftest import MODELS, fermion_window


def zz(w, a, b):
    return site_operator(w, a, "Z") @ site_operator(w, b, "Z")


def test_tfim_inner_hamiltonian_zz_only():
    w = Window(0, 2)
    h = inner_hamiltonian(tfim(1.0, 0.0), w.region()).matrix
    assert np.allclose(h, -zz(w, 0, 1) - zz(w, 1, 2))


def test_single_site_inner_hamiltonian():
    w = Window(0, 2)
    h = inner_hamiltonian(tfim(1.0, 1.0), w.region([0])).matrix
    assert np.allclose(h, -site_operator(w, 0, "X"))


def test_empty_region_gives_zero():
    w = Window(0, 2)
    assert np.allclose(inner_hamiltonian(tfim(), w.region([])).matrix, 0)


def test_tfim_surface_energy_two_bonds():
    w = Window(-2, 5)
    surf = surface_energy(tfim(1.0, 0.7), w.region(range(0, 4)))
    assert np.allclose(surf.operator.matrix, -zz(w, -1, 0) - zz(w, 3, 4))
    assert tuple(surf.boundary) == (-1, 0, 3, 4)
    assert not surf.truncated
    assert surf.norm == pytest.approx(2.0)


def test_field_only_tfim_has_no_surface():
    w = Window(0, 5)
    surf = surface_energy(tfim(0.0, 1.3), w.region([2, 3]))
    assert np.allclose(surf.operator.matrix, 0) and surf.norm == 0


def test_kitaev_cut_surface_support():
    w = fermion_window(6)
    surf = surface_energy(kitaev(1.0, 0.4, 0.3), w.region(range(0, 3)))
    assert tuple(surf.boundary) == (2, 3)


def test_surface_flags_truncation_at_window_edge():
    w = Window(0, 5)
    assert surface_energy(tfim(), w.region([0, 1])).truncated
    assert not surface_energy(tfim(), w.region([2, 3])).truncated


@pytest.mark.parametrize("name", list(MODELS))
def test_open_hamiltonian_decomposition(name):
    phi = MODELS[name]()
    w = Window(0, 5, phi.statistics)
    reg = w.region([2, 3])
    h_open = open_hamiltonian(phi, reg).matrix
    assert np.allclose(h_open, inner_hamiltonian(phi, reg).matrix + surface_energy(phi, reg).operator.matrix)


def test_open_hamiltonian_support():
    w = Window(-1, 2)
    assert tuple(open_hamiltonian(tfim(), w.region([0, 1])).support) == (-1, 0, 1, 2)


def test_open_hamiltonian_full_window_is_window_hamiltonian():
    w = Window(0, 4)
    assert np.allclose(open_hamiltonian(tfim(), w.region()).matrix, window_hamiltonian(tfim(), w))


@pytest.mark.parametrize("J", [1.0, -0.6, 2.5])
def test_tfim_coupling(J):
    w = Window(-2, 1)
    c = half_chain_coupling(tfim(J, 0.9), 0, w)
    assert np.allclose(c.operator.matrix, -J * zz(w, -1, 0))
    assert c.norm == pytest.approx(abs(J))
    assert coupling_norm(tfim(J, 0.9)) == pytest.approx(abs(J))


def test_kitaev_coupling_norm_matches_two_site_eigensolve():
    t, delta = 1.0, 1.0
    w = fermion_window(2)
    c0, c1 = site_operator(w, 0, "c"), site_operator(w, 1, "c")
    hop = c0.conj().T @ c1
    pair = c0 @ c1
    bond = -t * (hop + hop.conj().T) + delta * (pair + pair.conj().T)
    expected = np.max(np.abs(eigvalsh(bond)))
    assert coupling_norm(kitaev(t, delta, 0.7)) == pytest.approx(expected, abs=1e-12)
    # pairing acts on the even sector, hopping on the odd one: norm max(|t|, |delta|)
    assert expected == pytest.approx(1.0)


def test_decoupled_potential_identity():
    phi = xxz(1.0, 0.5, 0.3)
    w = Window(-2, 1)
    dec = decoupled_potential(phi, 0)
    lhs = window_hamiltonian(phi, w) - window_hamiltonian(dec, w)
    assert np.allclose(lhs, half_chain_coupling(phi, 0, w).operator.matrix)
    h_l = inner_hamiltonian(phi, w.region([-2, -1])).matrix
    h_r = inner_hamiltonian(phi, w.region([0, 1])).matrix
    assert np.allclose(h_l @ h_r, h_r @ h_l)


def test_decoupled_tfim_has_no_cross_bond():
    w = Window(-2, 1)
    h = window_hamiltonian(decoupled_potential(tfim(1.0, 0.0), 0), w)
    assert np.allclose(h, -zz(w, -2, -1) - zz(w, 0, 1))


@pytest.mark.parametrize("name", list(MODELS))
@pytest.mark.parametrize("shift", [-3, 1, 4])
def test_translation_covariance(name, shift):
    phi = MODELS[name]()
    w = Window(0, 4, phi.statistics)
    moved = Window(shift, 4 + shift, phi.statistics)
    for t in phi.terms:
        assert np.allclose(materialize_term(t, 1, w).matrix, materialize_term(t, 1 + shift, moved).matrix)
    assert np.allclose(window_hamiltonian(phi, w), window_hamiltonian(phi, moved))


def test_terms_validated():
    with pytest.raises(ContractError):
        Potential((Term((0,), np.array([[0, 1], [0, 0]], dtype=complex)),), Statistics.SPIN)
    odd = site_operator(fermion_window(1), 0, "c")
    with pytest.raises(ContractError):
        Potential((Term((0,), odd + odd.conj().T),), Statistics.FERMION)
    with pytest.raises(ContractError):
        Potential((Term((1,), np.eye(4)),), Statistics.SPIN)


def test_max_term_norm():
    assert max_term_norm(tfim(1.0, 3.0)) == pytest.approx(3.0)


def test_model_spec():
    spec = ModelSpec("TFIM", {"g": 2})
    assert spec.name == "tfim" and spec.full_params() == {"J": 1.0, "g": 2.0}
    assert spec.statistics is Statistics.SPIN
    assert ModelSpec("kitaev", {}).statistics is Statistics.FERMION
    with pytest.raises(PreconditionError):
        ModelSpec("hubbard", {})
    with pytest.raises(PreconditionError):
        ModelSpec("tfim", {"h": 1})


def test_statistics_mismatch_rejected():
    with pytest.raises(PreconditionError):
        inner_hamiltonian(kitaev(), Window(0, 2).region())


def test_xxz_two_site_spectrum():
    # H = Jxy (XX+YY)/4 + Jz ZZ/4 - h (Z0 + Z1)/2: triplet/singlet closed form
    jxy, jz, h = 1.0, 0.5, 0.3
    w = Window(0, 1)
    ev = np.sort(eigvalsh(window_hamiltonian(xxz(jxy, jz, h), w)))
    expected = np.sort([jz / 4 - h, jz / 4 + h, -jz / 4 + jxy / 2, -jz / 4 - jxy / 2])
    assert np.allclose(ev, expected)
