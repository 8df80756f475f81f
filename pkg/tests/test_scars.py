"""Scar tower states, raising-operator residuals, and leakage checks."""
import math

import numpy as np
import pytest

from scarsim.hamiltonian import (
    HamiltonianSpec,
    build_h0,
    build_hint,
    build_hnl,
    build_total,
)
from scarsim.model import LatticeSpec, SpinBasis, collective_operator
from scarsim.scars import (
    ScarTower,
    build_tower,
    export_tower,
    nonlinearity_check,
    sga_residual,
    subspace_leakage,
    tower_energies,
    verify_scar_eigenstates,
)


def make_spec(N, eta, omega=2.0, chi=0.0, perturbation=0.0):
    return HamiltonianSpec(lattice=LatticeSpec(d=1, L=10.0, N=N, gamma=2.0, lam=1.0),
                           omega=omega, eta=eta, chi=chi, perturbation=perturbation)


def test_tower_state_supports():
    N = 4
    tower = build_tower(N)
    # bottom state is the single all-down configuration
    assert np.count_nonzero(tower.states[:, 0]) == 1
    assert tower.states[0, 0] == 1.0
    # one excitation: N configurations with equal weight
    col = tower.states[:, 1]
    assert np.count_nonzero(col) == N
    assert np.allclose(col[col != 0], 1.0 / math.sqrt(N))
    # j excitations: C(N, j) configurations
    for j in range(N + 1):
        assert np.count_nonzero(tower.states[:, j]) == math.comb(N, j)


def test_tower_magnetization_ladder():
    N = 4
    tower = build_tower(N)
    basis = SpinBasis(N)
    qz = collective_operator(basis, "qz")
    for j in range(N + 1):
        v = tower.states[:, j]
        assert np.vdot(v, qz @ v) == pytest.approx(j - N / 2)
    assert np.vdot(tower.states[:, 2], qz @ tower.states[:, 2]) == pytest.approx(0.0)


def test_tower_orthonormal_and_projector_behaves():
    tower = build_tower(5)
    assert tower.gram_defect() < 1e-12
    rng = np.random.default_rng(7)
    psi = rng.normal(size=3**5) + 1j * rng.normal(size=3**5)
    psi /= np.linalg.norm(psi)
    once = tower.project(psi)
    twice = tower.project(once)
    assert np.allclose(once, twice, atol=1e-13)
    w = tower.subspace_weight(psi)
    assert 0.0 <= w <= 1.0
    # projecting a tower state is the identity on it
    assert np.allclose(tower.project(tower.states[:, 3]), tower.states[:, 3])


def test_tower_norm_constants_match_closed_form():
    N = 5
    tower = build_tower(N)
    expect = np.array([1.0 / (math.factorial(j) * math.sqrt(math.comb(N, j)))
                       for j in range(N + 1)])
    assert np.allclose(tower.norms, expect, rtol=1e-12)


def test_tower_energy_formula_endpoints():
    # harmonic ladder at chi=0, anharmonic shift at the top for chi != 0
    E = tower_energies(8, omega=2.0, chi=0.0)
    assert np.allclose(np.diff(E), 2.0)
    assert E[0] == pytest.approx(-8.0)
    E2 = tower_energies(8, omega=2.0, chi=2.0)
    assert E2[-1] == pytest.approx(8.0 + 2.0)
    assert np.ptp(np.diff(E2)) > 0.1 * 2.0 / 8


def test_sga_residual_discriminates_interaction_phase():
    tower = build_tower(4, omega=2.0)
    spec0 = make_spec(4, 0.0)
    H_eta0 = build_h0(spec0) + build_hint(spec0)
    # frozen measured value for this lattice (omega=2, lambda=1, gamma=2, L=10)
    assert sga_residual(H_eta0, 2.0, tower) == pytest.approx(0.637651943, abs=1e-8)
    spec_dmi = make_spec(4, math.pi / 2)
    H_dmi = build_h0(spec_dmi) + build_hint(spec_dmi)
    assert sga_residual(H_dmi, 2.0, tower) < 1e-11


def test_sga_residual_trivial_for_pure_splitting():
    tower = build_tower(3, omega=1.7)
    H = build_h0(make_spec(3, 0.0, omega=1.7))
    assert sga_residual(H, 1.7, tower) < 1e-13


def test_subspace_leakage_values():
    tower = build_tower(4)
    spec_dmi = make_spec(4, math.pi / 2, chi=2.0)
    H_dmi = build_h0(spec_dmi) + build_hint(spec_dmi)
    assert subspace_leakage(H_dmi, tower) < 1e-11
    assert subspace_leakage(build_hnl(spec_dmi), tower) < 1e-11
    # thermal point: the tower is driven out of itself; frozen measurement
    spec0 = make_spec(4, 0.0)
    H0 = build_h0(spec0) + build_hint(spec0)
    assert subspace_leakage(H0, tower) == pytest.approx(0.368148521, abs=1e-8)


def test_verify_scar_eigenstates_at_dmi_point():
    spec = make_spec(6, math.pi / 2, omega=2.0, chi=2.0)
    tower = build_tower(6, omega=2.0, chi=2.0)
    residual = verify_scar_eigenstates(build_total(spec), spec, tower)
    assert residual < 1e-11
    # also exact at eta = -pi/2
    spec_m = make_spec(6, -math.pi / 2, omega=2.0, chi=2.0)
    assert verify_scar_eigenstates(build_total(spec_m), spec_m, tower) < 1e-11


def test_verify_scar_eigenstates_rejects_wrong_regime():
    tower = build_tower(3)
    spec = make_spec(3, 0.4)
    with pytest.raises(ValueError, match="eta"):
        verify_scar_eigenstates(build_total(spec), spec, tower)
    spec_p = make_spec(3, math.pi / 2, perturbation=1e-5)
    with pytest.raises(ValueError, match="perturbation"):
        verify_scar_eigenstates(build_total(spec_p), spec_p, tower)


def test_nonlinearity_check_degenerate_and_generic():
    assert nonlinearity_check(1) is False
    assert nonlinearity_check(2) is True
    assert nonlinearity_check(4) is True


def test_nonlinearity_commutator_is_superdiagonal_on_tower():
    N = 4
    tower = build_tower(N)
    basis = SpinBasis(N)
    qp = collective_operator(basis, "q+")
    qm = collective_operator(basis, "q-")
    C = ((qp @ qm) @ qp - qp @ (qp @ qm)).toarray()
    M = tower.states.T @ C @ tower.states
    mask = np.zeros_like(M, dtype=bool)
    mask[np.arange(1, N + 1), np.arange(N)] = True
    assert np.abs(M[~mask]).max() < 1e-12
    # on the tower C acts as -2 Q^+ Q^z: weight -2 m_j sqrt(J(J+1)-m_j(m_j+1))
    J = N / 2
    m = np.arange(N) - J
    expect = -2 * m * np.sqrt(J * (J + 1) - m * (m + 1))
    assert np.allclose(M[mask], expect, atol=1e-12)


def test_export_tower_format(tmp_path):
    tower = build_tower(3, omega=1.0, chi=0.5)
    path = tmp_path / "tower.txt"
    export_tower(tower, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# j energy norm_const"
    j, energy, norm = lines[1].split()
    assert int(j) == 0
    assert float(energy) == pytest.approx(tower.energies[0])
    assert "# state 3" in lines
