"""Scar tower construction and algebraic verification.

The tower |S_j> = N_j (Q^+)^j |S_0>, built from the all-down product
state, spans an (N+1)-dimensional subspace on which Q^+ acts as the
raising operator of a collective spin J = N/2.  At eta = +-pi/2 the full
Hamiltonian inherits the tower as exact eigenstates with energies

    E_j = omega (j - N/2) + (chi/N) [J(J+1) - m_j^2 + m_j],  m_j = j - N/2.

The raising-operator property is verified through the one-sided residual
||([H, Q^+] - omega Q^+) P_S||: restricting on the right only.  (The
doubly projected commutator vanishes identically at every eta here --
the interaction maps tower states onto configurations with two sites at
level 0, orthogonal to the tower -- so it cannot distinguish the scarred
point from the thermal one; the one-sided form is the condition that
actually implies the eigenstate ladder.)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hamiltonian import HamiltonianSpec
from .model import SpinBasis, collective_operator


def tower_energies(N: int, omega: float, chi: float) -> np.ndarray:
    """Analytic tower energies E_j for j = 0..N."""
    J = N / 2.0
    m = np.arange(N + 1) - J
    return omega * m + (chi / N) * (J * (J + 1) - m**2 + m)


@dataclass(frozen=True)
class ScarTower:
    """Orthonormal scar states with their expected energies.

    `states` holds the tower as columns of a (3^N, N+1) array (real);
    `norms` are the constants N_j with |S_j> = N_j (Q^+)^j |S_0>.
    """

    N: int
    omega: float
    chi: float
    states: np.ndarray
    energies: np.ndarray
    norms: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def project(self, psi: np.ndarray) -> np.ndarray:
        """Apply the subspace projector P_S to a full-space vector."""
        return self.states @ (self.states.T.conj() @ psi)

    def subspace_weight(self, psi: np.ndarray) -> float:
        """<psi| P_S |psi> for a normalized full-space vector."""
        c = self.states.T.conj() @ psi
        return float(np.real(np.vdot(c, c)))

    def gram_defect(self) -> float:
        """Largest deviation of the tower Gram matrix from the identity."""
        g = self.states.T @ self.states
        return float(np.abs(g - np.eye(self.N + 1)).max())


def build_tower(N: int, omega: float = 0.0, chi: float = 0.0) -> ScarTower:
    """Build |S_j> by repeated sparse application of Q^+.

    Normalization constants are accumulated from the measured norms of
    each application rather than taken from a closed form; the closed
    form 1/(j! sqrt(C(N,j))) is asserted in the tests as a cross-check.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    basis = SpinBasis(N)
    qp = collective_operator(basis, "q+")
    dim = basis.dim_full
    states = np.zeros((dim, N + 1))
    norms = np.ones(N + 1)
    v = np.zeros(dim)
    v[0] = 1.0  # all sites at level -1
    states[:, 0] = v
    scale = 1.0
    for j in range(1, N + 1):
        w = qp @ states[:, j - 1]
        s = np.linalg.norm(w)
        states[:, j] = w / s
        scale *= s
        norms[j] = 1.0 / scale
    return ScarTower(N=N, omega=float(omega), chi=float(chi), states=states,
                     energies=tower_energies(N, omega, chi), norms=norms)


def sga_residual(H: sp.spmatrix, omega: float, tower: ScarTower) -> float:
    """||([H, Q^+] - omega Q^+) P_S||, the one-sided raising residual.

    Evaluated as the largest singular value of the dense dim x (N+1)
    matrix obtained by applying the bracket to every tower state.
    """
    basis = SpinBasis(tower.N)
    qp = collective_operator(basis, "q+")
    V = tower.states
    qpV = qp @ V
    X = H @ qpV - qp @ (H @ V) - omega * qpV
    return float(np.linalg.svd(X, compute_uv=False)[0])


def subspace_leakage(H: sp.spmatrix, tower: ScarTower) -> float:
    """||(1 - P_S) H P_S||: how strongly H drives the tower out of itself."""
    HV = H @ tower.states
    inside = tower.states @ (tower.states.T.conj() @ HV)
    return float(np.linalg.svd(HV - inside, compute_uv=False)[0])


def verify_scar_eigenstates(H_tot: sp.spmatrix, spec: HamiltonianSpec,
                            tower: ScarTower) -> float:
    """Max residual ||H|S_j> - E_j|S_j>|| over the tower.

    Only valid at the scarred point: raises ValueError unless
    eta = +-pi/2 (mod 2pi) and the perturbation is off.  With chi != 0
    the expected gaps must be non-constant (anharmonic ladder); a
    constant-gap result would indicate a broken energy formula.
    """
    if spec.N != tower.N:
        raise ValueError("tower size does not match the Hamiltonian")
    phase = math.cos(spec.eta)
    if abs(phase) > 1e-12:
        raise ValueError("scar eigenstate property requires eta = +-pi/2")
    if spec.perturbation != 0.0:
        raise ValueError("scar eigenstate property requires zero perturbation")
    energies = tower_energies(spec.N, spec.omega, spec.chi)
    if spec.chi != 0.0 and spec.N >= 2:
        gaps = np.diff(energies)
        if np.ptp(gaps) <= 0.1 * abs(spec.chi) / spec.N:
            raise RuntimeError("tower gaps unexpectedly harmonic at chi != 0")
    residuals = H_tot @ tower.states - tower.states * energies[None, :]
    return float(np.linalg.norm(residuals, axis=0).max())


def nonlinearity_check(N: int) -> bool:
    """True iff [Q^+Q^-, Q^+] falls outside span{Q^+, Q^-}.

    The least-squares fit is done with Frobenius inner products on the
    sparse matrices; residual norms above 1e-10 count as "outside".
    A single site (N=1) realizes a two-level ladder for which the
    commutator collapses back onto Q^+, so the check is false there.
    """
    basis = SpinBasis(N)
    qp = collective_operator(basis, "q+")
    qm = collective_operator(basis, "q-")
    C = (qp @ qm) @ qp - qp @ (qp @ qm)
    ops = [qp, qm]
    gram = np.array([[ (a.conj().multiply(b)).sum() for b in ops] for a in ops],
                    dtype=complex)
    rhs = np.array([(a.conj().multiply(C)).sum() for a in ops], dtype=complex)
    coef = np.linalg.solve(gram, rhs)
    fit = coef[0] * qp + coef[1] * qm
    residual = sp.linalg.norm(C - fit)
    return bool(residual > 1e-10)


def export_tower(tower: ScarTower, path) -> None:
    """Write the energies table and per-state sparse amplitudes as text."""
    with open(path, "w") as fh:
        fh.write("# j energy norm_const\n")
        for j in range(tower.N + 1):
            fh.write(f"{j} {tower.energies[j]:.17g} {tower.norms[j]:.17g}\n")
        for j in range(tower.N + 1):
            fh.write(f"# state {j}\n")
            col = tower.states[:, j]
            for idx in np.nonzero(col)[0]:
                fh.write(f"{idx} {col[idx]:.17g} 0\n")
