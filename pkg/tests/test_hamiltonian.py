"""Hamiltonian term construction and config round-trip checks."""
import math

import numpy as np
import pytest
import scipy.sparse as sp

from scarsim.errors import ConfigError
from scarsim.hamiltonian import (
    HamiltonianSpec,
    build_h0,
    build_hint,
    build_hnl,
    build_total,
    read_spec,
    spec_from_mapping,
    spec_to_mapping,
    write_spec,
)
from scarsim.model import (
    LatticeSpec,
    SpinBasis,
    collective_operator,
    hermiticity_defect,
)


def make_spec(N=4, omega=0.0, eta=math.pi / 2, chi=0.0, perturbation=0.0,
              L=10.0, gamma=2.0, lam=1.0, d=1):
    return HamiltonianSpec(lattice=LatticeSpec(d=d, L=L, N=N, gamma=gamma, lam=lam),
                           omega=omega, eta=eta, chi=chi, perturbation=perturbation)


def all_down_index(N):
    return 0  # every ternary digit 0


def test_h0_is_omega_qz():
    spec = make_spec(N=3, omega=2.0)
    h0 = build_h0(spec).toarray()
    basis = SpinBasis(3)
    qz = collective_operator(basis, "qz").toarray()
    assert np.allclose(h0, 2.0 * qz)
    # all-down diagonal entry is -N omega / 2
    assert h0[0, 0] == pytest.approx(-3.0)


def test_hint_single_hop_element_two_sites():
    # two sites at unit physical spacing: L equal to the lattice constant
    spec = HamiltonianSpec(lattice=LatticeSpec(d=1, L=1.0, N=2, gamma=2.0, lam=1.0),
                           omega=0.0, eta=0.7, chi=0.0)
    H = build_hint(spec)
    basis = SpinBasis(2)
    src = basis.index_of_levels([-1, 0])
    dst = basis.index_of_levels([0, -1])
    # quantum hops from site 1 to site 0: amplitude 2 e^{i eta}
    assert H[dst, src] == pytest.approx(2.0 * np.exp(0.7j))
    assert H[src, dst] == pytest.approx(2.0 * np.exp(-0.7j))


def test_hint_annihilates_all_down_state():
    spec = make_spec(N=4, eta=1.1)
    psi = np.zeros(3**4)
    psi[all_down_index(4)] = 1.0
    assert np.linalg.norm(build_hint(spec) @ psi) == 0.0


def test_hint_hermitian_and_conjugation_symmetry():
    for eta in (0.0, 0.3, math.pi / 2):
        spec = make_spec(N=4, eta=eta)
        H = build_hint(spec)
        assert hermiticity_defect(H) < 1e-14
        Hm = build_hint(make_spec(N=4, eta=-eta))
        assert np.abs((Hm - H.conj()).toarray()).max() < 1e-14


def test_hint_real_at_eta_zero():
    H = build_hint(make_spec(N=3, eta=0.0))
    assert not np.iscomplexobj(H.data)


def test_hnl_matrix_elements_and_identity():
    N = 4
    spec = make_spec(N=N, chi=1.6)
    hnl = build_hnl(spec)
    # annihilates all-down, gives chi on all-up
    psi = np.zeros(3**N)
    psi[0] = 1.0
    assert np.linalg.norm(hnl @ psi) == 0.0
    top = np.zeros(3**N)
    top[3**N - 1] = 1.0
    assert np.vdot(top, hnl @ top) == pytest.approx(1.6)
    # operator identity H_nl = (chi/N)(Q^2 - Qz^2 + Qz)
    basis = SpinBasis(N)
    qp = collective_operator(basis, "q+")
    qm = collective_operator(basis, "q-")
    qz = collective_operator(basis, "qz")
    q2 = 0.5 * (qp @ qm + qm @ qp) + qz @ qz
    alt = (1.6 / N) * (q2 - qz @ qz + qz)
    assert np.abs((hnl - alt).toarray()).max() < 1e-13


def test_hnl_positive_semidefinite():
    for N in (3, 5):
        hnl = build_hnl(make_spec(N=N, chi=2.0))
        evals = np.linalg.eigvalsh(hnl.toarray())
        assert evals.min() >= -1e-12


def test_total_conserves_magnetization_without_perturbation():
    for eta, chi in [(0.0, 0.0), (math.pi / 2, 2.0), (0.4, 1.0)]:
        spec = make_spec(N=4, omega=1.0, eta=eta, chi=chi)
        H = build_total(spec)
        basis = SpinBasis(4)
        M = sp.diags(basis.magnetizations().astype(float))
        comm = H @ M - M @ H
        assert np.abs(comm.toarray()).max() < 1e-13


def test_perturbation_breaks_magnetization_conservation():
    spec = make_spec(N=3, omega=1.0, perturbation=1e-2)
    H = build_total(spec)
    basis = SpinBasis(3)
    M = sp.diags(basis.magnetizations().astype(float))
    comm = (H @ M - M @ H).toarray()
    assert np.abs(comm).max() > 1e-3
    assert hermiticity_defect(build_total(spec)) < 1e-14


def test_total_reduces_to_pieces():
    spec = make_spec(N=3, omega=1.3, eta=0.9, chi=0.8, perturbation=2e-3)
    H = build_total(spec).toarray()
    basis = SpinBasis(3)
    parts = (build_h0(spec) + build_hint(spec) + build_hnl(spec)
             + 2e-3 * collective_operator(basis, "qx"))
    assert np.abs(H - parts.toarray()).max() < 1e-15


def test_linear_parts_cancel_on_tower_when_omega_is_minus_chi_over_n():
    # omega = -chi/N makes E(m) + const purely quadratic in m, so the
    # level spacings of the collective tower become odd-symmetric
    N, chi = 4, 2.0
    spec = make_spec(N=N, omega=-chi / N, chi=chi)
    # tower energies via diagonal expectation on ladder states is covered
    # in the scars tests; here check the defining spacing symmetry on the
    # analytic formula E(m) = omega*m + (chi/N)(J(J+1) - m^2 + m)
    J = N / 2
    m = np.arange(N + 1) - J
    E = spec.omega * m + (chi / N) * (J * (J + 1) - m**2 + m)
    assert np.allclose(E, (chi / N) * (J * (J + 1) - m**2))
    gaps = np.diff(E)
    assert np.allclose(gaps, -gaps[::-1])


def test_spec_mapping_roundtrip():
    spec = make_spec(N=4, omega=1.5, eta=math.pi / 2, chi=2.0, perturbation=1e-5)
    pairs = spec_to_mapping(spec)
    assert set(pairs) == {"d", "L", "N", "gamma", "lambda", "omega", "eta",
                          "chi", "perturbation"}
    assert spec_from_mapping(pairs) == spec


def test_spec_file_roundtrip(tmp_path):
    spec = make_spec(N=4, omega=0.0, eta=-math.pi / 2, chi=2.0)
    path = tmp_path / "model.cfg"
    write_spec(spec, path)
    assert read_spec(path) == spec


def test_spec_from_mapping_parses_pi_literals():
    pairs = {"d": "1", "L": "10", "N": "4", "gamma": "2", "lambda": "1",
             "omega": "0", "eta": "pi/2", "chi": "2", "perturbation": "0"}
    spec = spec_from_mapping(pairs)
    assert spec.eta == pytest.approx(math.pi / 2)


def test_spec_from_mapping_rejects_unknown_and_missing_keys():
    good = {"d": "1", "L": "10", "N": "4", "gamma": "2", "lambda": "1",
            "omega": "0", "eta": "0", "chi": "0"}
    spec = spec_from_mapping(good)  # perturbation is optional
    assert spec.perturbation == 0.0
    with pytest.raises(ConfigError, match="unknown"):
        spec_from_mapping({**good, "Lambda": "1"})
    bad = dict(good)
    del bad["omega"]
    with pytest.raises(ConfigError, match="missing"):
        spec_from_mapping(bad)
