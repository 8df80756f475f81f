"""Husimi distribution over coherent states and the localization integral.

The localization integral I sums the Husimi weight over the whole sphere
with the (N+1)/(4pi) prefactor of the spin-N/2 resolution of identity,
so it equals the scar-subspace weight of the state exactly.  That
equality is checked against the independent projector route from the
scars module; this file deliberately never touches the tower states, so
the two computations share no code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import coherent_state


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre (in cos theta) x uniform-phi product rule."""

    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    phi_nodes: np.ndarray
    phi_weight: float

    def __post_init__(self):
        if np.any(self.theta_weights <= 0) or self.phi_weight <= 0:
            raise ValueError("quadrature weights must be positive")
        total = self.theta_weights.sum() * self.phi_weight * len(self.phi_nodes)
        if abs(total - 4 * np.pi) > 1e-12:
            raise ValueError("quadrature does not integrate 1 to 4 pi")

    @property
    def n_theta(self) -> int:
        return len(self.theta_nodes)

    @property
    def n_phi(self) -> int:
        return len(self.phi_nodes)


def sphere_quadrature(n_theta: int, n_phi: int) -> SphereQuadrature:
    """Build the product rule with n_theta polar and n_phi azimuthal nodes."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError("node counts must be positive")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    return SphereQuadrature(theta_nodes=np.arccos(x[::-1]),
                            theta_weights=w[::-1].copy(),
                            phi_nodes=np.linspace(0.0, 2 * np.pi, n_phi,
                                                  endpoint=False),
                            phi_weight=2 * np.pi / n_phi)


def default_quadrature(N: int) -> SphereQuadrature:
    """Smallest rule that integrates any N-site Husimi weight exactly.

    The Husimi weight is a polynomial of degree N in cos theta and a
    Fourier series with modes up to N in phi, so N+1 Gauss-Legendre
    nodes and 2N+2 uniform azimuthal nodes are already exact.
    """
    return sphere_quadrature(N + 1, 2 * N + 2)


def _infer_sites(psi: np.ndarray) -> int:
    N = round(np.log(len(psi)) / np.log(3.0))
    if 3 ** N != len(psi):
        raise ValueError(f"state length {len(psi)} is not a power of 3")
    return N


def husimi_value(psi: np.ndarray, theta: float, phi: float) -> float:
    """Q(theta, phi) = |<psi|theta,phi>|^2."""
    N = _infer_sites(psi)
    return float(np.abs(np.vdot(psi, coherent_state(N, theta, phi))) ** 2)


def _coherent_frame(N: int, quad: SphereQuadrature) -> np.ndarray:
    """Coherent-state columns for every quadrature node, phi fastest."""
    frame = np.empty((3 ** N, quad.n_theta * quad.n_phi), dtype=complex)
    col = 0
    for theta in quad.theta_nodes:
        for phi in quad.phi_nodes:
            frame[:, col] = coherent_state(N, theta, phi)
            col += 1
    return frame


def _check_resolution(N: int, quad: SphereQuadrature) -> None:
    if quad.n_theta < N + 1 or quad.n_phi < 2 * N + 2:
        raise ValueError(
            f"quadrature ({quad.n_theta} x {quad.n_phi}) under-resolves "
            f"N={N}; need at least {N + 1} x {2 * N + 2}")


def localization_integral(psi: np.ndarray, quad: SphereQuadrature) -> float:
    """I = [(N+1)/(4 pi)] * integral of the Husimi weight over the sphere."""
    return float(localization_series(psi[:, None], quad)[0])


def localization_series(states: np.ndarray,
                        quad: SphereQuadrature) -> np.ndarray:
    """I for every column of `states` (a (dim, n) snapshot array)."""
    N = _infer_sites(states[:, 0])
    _check_resolution(N, quad)
    frame = _coherent_frame(N, quad)
    amps = np.abs(frame.conj().T @ states) ** 2   # (nodes, n)
    w = np.repeat(quad.theta_weights, quad.n_phi) * quad.phi_weight
    return (N + 1) / (4 * np.pi) * (w @ amps)


def husimi_map(psi: np.ndarray, quad: SphereQuadrature) -> np.ndarray:
    """Rows (theta, phi, Q) over the full quadrature grid."""
    N = _infer_sites(psi)
    frame = _coherent_frame(N, quad)
    Q = np.abs(frame.conj().T @ psi) ** 2
    thetas = np.repeat(quad.theta_nodes, quad.n_phi)
    phis = np.tile(quad.phi_nodes, quad.n_theta)
    return np.column_stack([thetas, phis, Q])
