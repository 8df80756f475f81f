"""Collective-ladder reference model: algebra, states, dynamics, echo."""
import math

import numpy as np
import pytest

from scarsim.collective import (
    collective_coherent,
    collective_echo_error,
    collective_echo_signal,
    collective_evolve,
    collective_hamiltonian,
    collective_qfi,
    collective_qfi_series,
    embed,
    extract,
)


def test_ladder_operators_close_su2():
    m = collective_hamiltonian(5)
    assert np.allclose(m.qp @ m.qm - m.qm @ m.qp, 2 * m.qz)
    assert np.allclose(m.qz @ m.qp - m.qp @ m.qz, m.qp)
    assert np.allclose(m.qx @ m.qy - m.qy @ m.qx, 1j * m.qz)
    # Casimir Q^2 = J(J+1) on the whole ladder
    q2 = m.qx @ m.qx + m.qy @ m.qy + m.qz @ m.qz
    assert np.allclose(q2, 2.5 * 3.5 * np.eye(6))


def test_tower_energies():
    # top of the tower: E = omega*N/2 + chi, independent of N
    for N in (2, 5, 8):
        m = collective_hamiltonian(N, omega=2.0, chi=0.7)
        assert m.energies[-1] == pytest.approx(2.0 * N / 2 + 0.7)
        # gap above level m is omega - 2(chi/N)m
        gaps = np.diff(m.energies)
        assert np.allclose(gaps, 2.0 - 2 * (0.7 / N) * m.m[:-1])


def test_coherent_state_poles_and_equator():
    assert np.allclose(collective_coherent(4, 0.0, 0.3), [1, 0, 0, 0, 0])
    assert np.abs(collective_coherent(4, math.pi, 0.0))[-1] == pytest.approx(1.0)
    c = collective_coherent(4, math.pi / 2, 0.0)
    # binomial amplitude profile at the equator
    assert np.allclose(np.abs(c) ** 2,
                       np.array([1, 4, 6, 4, 1]) / 16.0)
    m = collective_hamiltonian(4)
    assert np.real(np.vdot(c, m.qx @ c)) == pytest.approx(2.0)
    assert np.real(np.vdot(c, m.qz @ c)) == pytest.approx(0.0, abs=1e-15)


def test_coherent_state_is_minimal_uncertainty():
    # any coherent state has unit QFI density
    for theta, phi in [(0.3, 0.0), (math.pi / 2, 1.1), (2.0, -0.4)]:
        m = collective_hamiltonian(7)
        c = collective_coherent(7, theta, phi)
        var_tot = 0.0
        for op in (m.qx, m.qy, m.qz):
            w = op @ c
            var_tot += np.real(np.vdot(w, w)) - np.real(np.vdot(c, w)) ** 2
        # total transverse variance of a spin-J coherent state is J/2 * 2
        assert var_tot == pytest.approx(7 / 2.0)


def test_dicke_state_qfi_density():
    # f on ladder state j is 2(J(J+1) - m^2)/N; peak (N+2)/2 at m=0
    N = 8
    m = collective_hamiltonian(N)
    vals = []
    for j in range(N + 1):
        c = np.zeros(N + 1)
        c[j] = 1.0
        vals.append(collective_qfi(m, c))
    mm = np.arange(N + 1) - N / 2
    expect = 2 * (N / 2 * (N / 2 + 1) - mm**2) / N
    assert np.allclose(vals, expect)
    assert max(vals) == pytest.approx((N + 2) / 2)


def test_evolution_is_exact_phase_accumulation():
    m = collective_hamiltonian(5, omega=1.3, chi=0.9)
    c0 = collective_coherent(5, 1.0, 0.2)
    traj = collective_evolve(m, c0, np.array([0.0, 2.0]))
    assert np.allclose(traj[0], c0)
    assert np.allclose(traj[1], np.exp(-2j * m.energies) * c0)
    # norm is conserved along the way
    assert np.allclose(np.linalg.norm(traj, axis=1), 1.0)


def test_linear_precession_rotates_azimuth():
    # pure omega term: state at time t is the coherent state at phi + omega*t
    # up to the global phase exp(+i t N omega / 2)
    N, omega, t = 6, 2.0, 0.37
    m = collective_hamiltonian(N, omega=omega)
    c0 = collective_coherent(N, 1.1, 0.5)
    ct = collective_evolve(m, c0, np.array([t]))[0]
    expect = np.exp(1j * t * N * omega / 2) * collective_coherent(N, 1.1, 0.5 + omega * t)
    assert np.allclose(ct, expect)


def test_twisting_builds_cat_with_extensive_qfi():
    # at t = pi N / (2 chi) with omega = 0 the state is a two-branch
    # superposition with f = N exactly
    N, chi = 6, 2.0
    m = collective_hamiltonian(N, omega=0.0, chi=chi)
    c0 = collective_coherent(N, math.pi / 2, 0.0)
    tstar = math.pi * N / (2 * chi)
    f = collective_qfi_series(m, c0, np.array([tstar]))[0]
    assert f == pytest.approx(N, abs=1e-9)
    # and f(0) = 1 for the coherent start
    assert collective_qfi(m, c0) == pytest.approx(1.0)


def test_embed_extract_roundtrip():
    N = 4
    c = collective_coherent(N, 1.2, 0.7)
    full = embed(c, N)
    assert full.shape == (3**N,)
    assert np.linalg.norm(full) == pytest.approx(1.0)
    back = extract(full, N)
    assert np.allclose(back, c)
    # ladder bottom is the all-down product state, index 0
    e0 = embed(np.eye(N + 1)[0], N)
    assert e0[0] == 1.0 and np.count_nonzero(e0) == 1


def test_extract_warns_when_weight_leaks():
    N = 3
    full = np.zeros(3**N, dtype=complex)
    full[1] = 1.0  # one site at level 0: outside the ladder support
    with pytest.warns(UserWarning, match="lossy"):
        c = extract(full, N)
    assert np.allclose(c, 0.0)


def test_echo_error_spot_values():
    # frozen from this implementation; variance at zero encoding angle is
    # exactly N/4 (the readout refocuses to a coherent state)
    de, der, var = collective_echo_error(6, 2.0, 1.4)
    assert var == pytest.approx(1.5, abs=1e-10)
    assert der == pytest.approx(4.293055155765, abs=1e-9)
    assert de == pytest.approx(0.285285147047, abs=1e-9)


def test_echo_derivative_matches_finite_difference():
    eps = 1e-6
    for N, t in [(4, 0.9), (6, 1.4), (8, 1.7)]:
        _, der, _ = collective_echo_error(N, 2.0, t)
        s1 = collective_echo_signal(N, 2.0, t, eps)
        s2 = collective_echo_signal(N, 2.0, t, -eps)
        assert abs(s1 - s2) / (2 * eps) == pytest.approx(der, rel=1e-6)


def test_echo_minimum_beats_shot_noise():
    # scan minima frozen from a 1200-point grid; all beat 1/sqrt(N)
    expect = {4: 0.433013, 6: 0.285272, 8: 0.212201, 10: 0.168845}
    for N, target in expect.items():
        ts = np.linspace(1e-3, 1.2 * math.pi * N / 4, 1200)
        best = min(collective_echo_error(N, 2.0, t)[0] for t in ts)
        assert best == pytest.approx(target, abs=1e-5)
        assert best < 1.0 / math.sqrt(N)


def test_echo_error_inf_sentinel_at_zero_time():
    de, der, _ = collective_echo_error(8, 2.0, 0.0)
    assert math.isinf(de)
    assert der < 1e-12
