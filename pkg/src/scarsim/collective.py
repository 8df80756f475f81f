"""Independent collective-spin (Dicke ladder) reference implementation.

The tower of uniform-superposition states maps onto a single pseudo-spin
J = N/2, and within that (N+1)-dimensional ladder the dynamics is exactly
solvable.  This module implements that reduced description from scratch --
ladder matrix elements, diagonal energies, coherent states, twisting
dynamics, and the time-reversal echo -- without touching any of the full
3^N lattice machinery, so agreement between the two code paths is a real
cross-check rather than a tautology.

Ladder ordering: index j = 0..N counts raised sites and corresponds to the
magnetization quantum number m = j - N/2 (ascending).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm


@dataclass(frozen=True)
class CollectiveModel:
    """Pseudo-spin J = N/2 ladder with its diagonal tower Hamiltonian.

    Attributes
    ----------
    N : int
        Number of lattice sites represented by the ladder.
    omega, chi : float
        Level splitting and collective nonlinearity strength.
    m : ndarray
        Magnetization quantum numbers -J..J (ascending, length N+1).
    energies : ndarray
        E(m) = omega*m + (chi/N) * (J(J+1) - m^2 + m).
    qz, qp, qm, qx, qy : ndarray
        Dense (N+1) x (N+1) collective operators in the ladder basis.
    """

    N: int
    omega: float
    chi: float
    m: np.ndarray
    energies: np.ndarray
    qz: np.ndarray
    qp: np.ndarray
    qm: np.ndarray
    qx: np.ndarray
    qy: np.ndarray

    @property
    def J(self) -> float:
        return self.N / 2.0

    @property
    def dim(self) -> int:
        return self.N + 1


def collective_hamiltonian(N: int, omega: float = 0.0, chi: float = 0.0) -> CollectiveModel:
    """Build the (N+1)-dimensional ladder model for N sites.

    Raising matrix elements are sqrt(J(J+1) - m(m+1)); the Hamiltonian is
    diagonal with E(m) = omega*m + (chi/N)*(J(J+1) - m^2 + m).
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    J = N / 2.0
    m = np.arange(N + 1) - J
    energies = omega * m + (chi / N) * (J * (J + 1) - m**2 + m)

    qp = np.zeros((N + 1, N + 1))
    up = np.sqrt(J * (J + 1) - m[:-1] * (m[:-1] + 1))
    qp[np.arange(1, N + 1), np.arange(N)] = up
    qm = qp.T.copy()
    qz = np.diag(m)
    qx = (qp + qm) / 2.0
    qy = 0.5j * (qm - qp)
    return CollectiveModel(N=N, omega=float(omega), chi=float(chi), m=m,
                           energies=energies, qz=qz, qp=qp, qm=qm, qx=qx, qy=qy)


def collective_coherent(N: int, theta: float, phi: float) -> np.ndarray:
    """Ladder coefficients of the product coherent state.

    c_j = sqrt(C(N,j)) * cos(theta/2)^(N-j) * sin(theta/2)^j * e^{-i j phi}.
    """
    j = np.arange(N + 1)
    binom = np.array([math.comb(N, int(k)) for k in j], dtype=float)
    c = (np.sqrt(binom)
         * np.cos(theta / 2.0) ** (N - j)
         * np.sin(theta / 2.0) ** j
         * np.exp(-1j * phi * j))
    return c / np.linalg.norm(c)


def collective_evolve(model: CollectiveModel, coeffs: np.ndarray,
                      times: np.ndarray) -> np.ndarray:
    """Evolve ladder coefficients; returns array of shape (len(times), N+1).

    The tower Hamiltonian is diagonal, so this is exact phase accumulation.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(-1j * np.outer(times, model.energies))
    return phases * coeffs[None, :]


def collective_qfi(model: CollectiveModel, coeffs: np.ndarray) -> float:
    """QFI density f = 4 Var(Qy) / N for a pure ladder state."""
    w = model.qy @ coeffs
    mean = np.real(np.vdot(coeffs, w))
    second = np.real(np.vdot(w, w))
    return 4.0 * (second - mean**2) / model.N


def collective_qfi_series(model: CollectiveModel, coeffs0: np.ndarray,
                          times: np.ndarray) -> np.ndarray:
    """f(t) along the exact ladder trajectory."""
    traj = collective_evolve(model, coeffs0, times)
    w = traj @ model.qy.T.conj()
    means = np.real(np.einsum("ti,ti->t", traj.conj(), w))
    seconds = np.real(np.einsum("ti,ti->t", w.conj(), w))
    return 4.0 * (seconds - means**2) / model.N


def _zero_free_indices(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Full-basis indices of the 2^N configurations with no site at level 0.

    Site n is the n-th ternary digit of the basis index (site 0 fastest);
    level -1 is digit 0 and level +1 is digit 2.  Returns (indices, counts)
    where counts[k] is the number of raised sites in configuration k.
    """
    masks = np.arange(2**N, dtype=np.int64)
    counts = np.zeros(2**N, dtype=np.int64)
    idx = np.zeros(2**N, dtype=np.int64)
    for n in range(N):
        bit = (masks >> n) & 1
        counts += bit
        idx += bit * 2 * 3**n
    return idx, counts


def embed(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Expand ladder coefficients into the full 3^N product basis."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (N + 1,):
        raise ValueError(f"expected {N + 1} ladder coefficients")
    idx, counts = _zero_free_indices(N)
    weights = np.array([1.0 / math.sqrt(math.comb(N, k)) for k in range(N + 1)])
    full = np.zeros(3**N, dtype=complex)
    full[idx] = coeffs[counts] * weights[counts]
    return full


def extract(full: np.ndarray, N: int) -> np.ndarray:
    """Project a full 3^N state onto the ladder; warn if weight is lost.

    The leaked weight |psi|^2 - |c|^2 is reported through a warning when it
    exceeds 1e-6, mirroring the lossy-extract contract.
    """
    full = np.asarray(full, dtype=complex)
    if full.shape != (3**N,):
        raise ValueError(f"expected a 3^{N} amplitude vector")
    idx, counts = _zero_free_indices(N)
    amps = full[idx]
    coeffs = np.zeros(N + 1, dtype=complex)
    np.add.at(coeffs, counts, amps)
    weights = np.array([1.0 / math.sqrt(math.comb(N, k)) for k in range(N + 1)])
    coeffs *= weights
    leaked = float(np.real(np.vdot(full, full) - np.vdot(coeffs, coeffs)))
    if leaked > 1e-6:
        warnings.warn(f"extract is lossy: leaked weight {leaked:.3e}",
                      stacklevel=2)
    return coeffs


def collective_echo_error(N: int, chi: float, t: float,
                          omega: float | None = None,
                          theta: float = math.pi / 2, phi: float = 0.0,
                          ) -> tuple[float, float, float]:
    """Exact ladder version of the twist / rotate / untwist echo.

    Prepares the equatorial coherent state, twists for time t, encodes a
    rotation about y, reverses (omega, chi) for time t, and reads out Qy.
    Returns (delta_eps, derivative, variance) at zero encoding angle, with
    delta_eps = sqrt(variance) / |derivative| and +inf when the signal
    derivative is below 1e-12.

    omega defaults to -chi/N, the choice that cancels the ladder-linear
    part of the tower energies.
    """
    if omega is None:
        omega = -chi / N
    model = collective_hamiltonian(N, omega=omega, chi=chi)
    psi0 = collective_coherent(N, theta, phi)
    u_f = np.exp(-1j * t * model.energies)
    u_b = np.exp(+1j * t * model.energies)

    phi_state = u_f * psi0
    # B = U_b^dag Qy U_b is a diagonal dressing of Qy.
    b_mat = np.outer(u_b.conj(), u_b) * model.qy
    comm = b_mat @ model.qy - model.qy @ b_mat
    derivative = abs(np.real(1j * np.vdot(phi_state, comm @ phi_state)))

    final0 = u_b * phi_state  # encoding angle 0
    w = model.qy @ final0
    mean = np.real(np.vdot(final0, w))
    variance = np.real(np.vdot(w, w)) - mean**2

    if derivative < 1e-12:
        return math.inf, derivative, variance
    return math.sqrt(variance) / derivative, derivative, variance


def collective_echo_signal(N: int, chi: float, t: float, eps: float,
                           omega: float | None = None,
                           theta: float = math.pi / 2, phi: float = 0.0) -> float:
    """<Qy> after the echo with a finite encoding angle (for derivative checks)."""
    if omega is None:
        omega = -chi / N
    model = collective_hamiltonian(N, omega=omega, chi=chi)
    psi0 = collective_coherent(N, theta, phi)
    u_f = np.exp(-1j * t * model.energies)
    u_b = np.exp(+1j * t * model.energies)
    rot = expm(1j * eps * model.qy)
    final = u_b * (rot @ (u_f * psi0))
    return float(np.real(np.vdot(final, model.qy @ final)))
