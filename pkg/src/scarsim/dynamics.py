"""Coherent preparation, time propagation, QFI series, and max-QFI scans.

Two propagation backends.  "dense-eig" diagonalizes the full Hamiltonian
once and applies exact phases -- the reference path, feasible up to a few
thousand basis states.  "krylov" is a short-iterate Lanczos exponential
with full reorthogonalization and adaptive step halving against a local
error estimate; it only ever touches the Hamiltonian through matvecs, so
it scales to the largest lattices this package runs (N=10, dim 59049).
The two are required to agree to 1e-8 wherever both fit, and that cross
check is part of the test suite.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import CapacityError
from .hamiltonian import HamiltonianSpec, build_total
from .model import SpinBasis, collective_operator
from .qfi import qfi_pure

DENSE_EIG_CAP = 2187     # largest dimension the dense-eig backend accepts
KRYLOV_DIM = 30          # Lanczos basis size per step
KRYLOV_TOL = 1e-10       # local (per-step) error bound


def coherent_state(N: int, theta: float, phi: float) -> np.ndarray:
    """Product state with every site at (theta, phi) on its +1/-1 sphere.

    Site amplitudes cos(theta/2)|-1> + e^{-i phi} sin(theta/2)|+1>; the
    level-0 component is empty, so the state lives in the zero-free
    subspace and carries full scar-subspace weight for every angle.
    """
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    site = np.array([np.cos(theta / 2.0), 0.0,
                     np.exp(-1j * phi) * np.sin(theta / 2.0)])
    psi = np.array([1.0 + 0.0j])
    for _ in range(N):
        # site 0 is the fastest basis digit, so each new site goes on the left
        psi = np.kron(site, psi)
    return psi


@dataclass(frozen=True)
class TrajectoryRecord:
    """Snapshots of one propagation run plus derived series."""

    spec: HamiltonianSpec
    times: np.ndarray
    states: np.ndarray            # (dim, n_times) snapshot columns
    fidelity_series: np.ndarray   # |<psi(0)|psi(t)>|^2
    backend: str
    f_series: np.ndarray | None = None
    I_series: np.ndarray | None = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        norms = np.linalg.norm(self.states, axis=0)
        if np.abs(norms - 1.0).max() > 1e-9:
            raise ValueError("snapshot norms drifted beyond 1e-9")


def _lanczos_step(H, psi: np.ndarray, dt: float,
                  m_max: int, tol: float):
    """One Krylov approximation of e^{-i dt H} psi.

    Returns (result, converged).  The error estimate is the standard
    last-coefficient bound beta_m * |u_m|; full reorthogonalization keeps
    the basis clean enough for it to be trusted at these sizes.
    """
    beta0 = np.linalg.norm(psi)
    V = np.empty((len(psi), m_max), dtype=complex)
    V[:, 0] = psi / beta0
    alphas: list[float] = []
    betas: list[float] = []
    for m in range(m_max):
        w = H @ V[:, m]
        alphas.append(float(np.real(np.vdot(V[:, m], w))))
        w -= V[:, :m + 1] @ (V[:, :m + 1].conj().T @ w)
        beta = float(np.linalg.norm(w))
        T = np.diag(alphas)
        if betas:
            off = np.array(betas)
            T += np.diag(off, 1) + np.diag(off, -1)
        u = la.expm(-1j * dt * T)[:, 0]
        if beta < 1e-14 or beta * abs(u[-1]) < tol:
            return beta0 * (V[:, :m + 1] @ u), True
        if m + 1 < m_max:
            V[:, m + 1] = w / beta
            betas.append(beta)
    return beta0 * (V @ u), False


def propagate(spec: HamiltonianSpec, psi0: np.ndarray, times: np.ndarray,
              backend: str = "auto",
              krylov_dim: int = KRYLOV_DIM,
              krylov_tol: float = KRYLOV_TOL,
              dense_cap: int = DENSE_EIG_CAP) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (t, psi(t)) snapshots of e^{-i t H} psi0 at the grid times.

    backend "auto" picks dense-eig when the dimension fits under
    `dense_cap` and Krylov otherwise.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    H = build_total(spec)
    dim = H.shape[0]
    if backend == "auto":
        backend = "dense-eig" if dim <= dense_cap else "krylov"
    if backend == "dense-eig":
        if dim > dense_cap:
            raise CapacityError(
                f"dense-eig backend caps at dimension {dense_cap}, got {dim};"
                " use the krylov backend")
        A = H.toarray()
        if np.iscomplexobj(A) and not A.imag.any():
            A = A.real
        evals, evecs = la.eigh(A)
        coeffs = evecs.conj().T @ psi0
        for t in times:
            yield float(t), evecs @ (np.exp(-1j * evals * t) * coeffs)
    elif backend == "krylov":
        psi = np.asarray(psi0, dtype=complex).copy()
        t_cur = 0.0
        if times[0] < 0:
            raise ValueError("krylov backend propagates forward from t=0")
        Hc = H.tocsr()
        step = max(times[0], times[-1] / max(len(times), 1), 1e-3)
        for t in times:
            while t_cur < t - 1e-14:
                h = min(step, t - t_cur)
                out, ok = _lanczos_step(Hc, psi, h, krylov_dim, krylov_tol)
                if ok:
                    # exact evolution is unitary; pinning the norm keeps
                    # per-step 1e-10 errors from accumulating into the
                    # norm checks downstream
                    psi = out / np.linalg.norm(out)
                    t_cur += h
                    if h == step:
                        step *= 1.25
                else:
                    step = h / 2.0
                    if step < 1e-12:
                        raise RuntimeError(
                            "krylov step size collapsed below 1e-12")
            yield float(t), psi.copy()
    else:
        raise ValueError(f"unknown backend {backend!r}")


def evolve(spec: HamiltonianSpec, psi0: np.ndarray, times: np.ndarray,
           backend: str = "auto", **kwargs) -> TrajectoryRecord:
    """Propagate and collect snapshots into a TrajectoryRecord."""
    times = np.asarray(times, dtype=float)
    dim = 3 ** spec.N
    states = np.empty((dim, len(times)), dtype=complex)
    chosen = backend
    if chosen == "auto":
        chosen = "dense-eig" if dim <= kwargs.get(
            "dense_cap", DENSE_EIG_CAP) else "krylov"
    for k, (_, psi) in enumerate(
            propagate(spec, psi0, times, backend=chosen, **kwargs)):
        states[:, k] = psi
    fid = np.abs(np.asarray(psi0, dtype=complex).conj() @ states) ** 2
    return TrajectoryRecord(spec=spec, times=times, states=states,
                            fidelity_series=fid, backend=chosen)


def qfi_timeseries(traj: TrajectoryRecord, O=None) -> np.ndarray:
    """f(t_k) for every snapshot, default observable Q^y."""
    if O is None:
        O = collective_operator(SpinBasis(traj.spec.N), "qy")
    N = traj.spec.N
    W = O @ traj.states
    means = np.real(np.einsum("ik,ik->k", traj.states.conj(), W))
    seconds = np.real(np.einsum("ik,ik->k", W.conj(), W))
    return 4.0 * (seconds - means**2) / N


def with_qfi(traj: TrajectoryRecord, O=None) -> TrajectoryRecord:
    """Copy of the record with f_series filled in."""
    return dataclasses.replace(traj, f_series=qfi_timeseries(traj, O))


def default_time_grid(N: int, chi: float, n_points: int = 400,
                      stretch: float = 1.2) -> np.ndarray:
    """Grid resolving the twisting time t* = pi N / (2 chi).

    Starts just above zero (propagation begins at t=0 anyway) and spans
    stretch * t*.
    """
    if chi == 0.0:
        raise ValueError("twisting grid needs chi != 0")
    t_star = np.pi * N / (2.0 * abs(chi))
    return np.linspace(1e-3, stretch * t_star, n_points)


def max_qfi_scan(specs, n_points: int = 400,
                 t_max: float | None = None,
                 backend: str = "auto", **kwargs) -> list[dict]:
    """Largest dynamically generated QFI density for each spec.

    Streams snapshots (no trajectory is kept), evaluating f on the fly;
    returns one row per spec: {N, eta, chi, max_f, argmax_t}.
    """
    rows = []
    for spec in specs:
        N = spec.N
        if t_max is None:
            times = default_time_grid(N, spec.chi, n_points)
        else:
            times = np.linspace(1e-3, t_max, n_points)
        psi0 = coherent_state(N, np.pi / 2.0, 0.0)
        qy = collective_operator(SpinBasis(N), "qy")
        best_f, best_t = -np.inf, 0.0
        for t, psi in propagate(spec, psi0, times, backend=backend, **kwargs):
            res = qfi_pure(psi, qy, N)
            if res.density > best_f:
                best_f, best_t = res.density, t
        rows.append({"N": N, "eta": spec.eta, "chi": spec.chi,
                     "max_f": best_f, "argmax_t": best_t})
    return rows
