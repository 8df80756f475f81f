"""Sector-resolved diagonalization, eigenstate QFI scans, gap ratios.

The Hamiltonian at zero perturbation conserves total magnetization, so
its spectrum is assembled sector by sector (far cheaper than one dense
factorization of the full 3^N space).  The perturbation eps_p * Q^x is
applied with degenerate perturbation theory: eigenstates are grouped by
energy coincidence and each group is re-diagonalized with the
perturbation projected into it to first and second order.  Second order
matters because Q^x moves between magnetization sectors, so a multiplet
living inside a single sector has no first-order coupling; its basis is
selected by the effective operator built from all out-of-group states.
This reproduces the eps_p -> 0+ limit of the perturbed eigenbasis --
precisely the role the tiny eps_p = 1e-5 plays: picking a deterministic
basis inside degenerate multiplets.  A literal dense diagonalization of
the perturbed matrix is available as method="dense" and is cross-checked
in the tests.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import CapacityError
from .hamiltonian import HamiltonianSpec, build_total
from .model import SpinBasis, collective_operator, magnetization_sector, restrict
from .scars import build_tower

DENSE_CAP = 20000


def _dense_hermitian(H: sp.spmatrix):
    A = H.toarray()
    if np.iscomplexobj(A) and not A.imag.any():
        A = A.real
    return A


def eigensystem(H: sp.spmatrix, sector: SpinBasis | None = None,
                dense_cap: int = DENSE_CAP):
    """Dense eigendecomposition of H, optionally restricted to a sector.

    Returns (eigenvalues ascending, eigenvector columns).  Refuses
    dimensions above `dense_cap` with a pointer to sector restriction.
    """
    Hs = restrict(H, sector) if sector is not None else H.tocsr()
    dim = Hs.shape[0]
    if dim > dense_cap:
        raise CapacityError(
            f"dense diagonalization of dimension {dim} exceeds the cap "
            f"{dense_cap}; restrict to a magnetization sector or reduce N")
    return la.eigh(_dense_hermitian(Hs))


@dataclass(frozen=True)
class EigenScanRecord:
    """Per-eigenstate energies, QFI densities, and scar-subspace weights."""

    energies: np.ndarray
    qfi_densities: np.ndarray
    scar_overlaps: np.ndarray
    sector: str

    def __post_init__(self):
        if not (len(self.energies) == len(self.qfi_densities)
                == len(self.scar_overlaps)):
            raise ValueError("record arrays must have equal length")
        if np.any(np.diff(self.energies) < 0):
            raise ValueError("energies must be nondecreasing")
        if (np.min(self.scar_overlaps, initial=0.0) < -1e-10
                or np.max(self.scar_overlaps, initial=0.0) > 1 + 1e-10):
            raise ValueError("scar overlaps must lie in [0, 1]")

    def scar_indices(self, threshold: float = 0.99) -> np.ndarray:
        return np.nonzero(self.scar_overlaps > threshold)[0]

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("energy,qfi_density,scar_overlap,sector\n")
            for e, f, s in zip(self.energies, self.qfi_densities,
                               self.scar_overlaps):
                fh.write(f"{e:.17g},{f:.17g},{s:.17g},{self.sector}\n")


def _scan_dense(spec: HamiltonianSpec, dense_cap: int) -> EigenScanRecord:
    """Literal full-space diagonalization including the perturbation."""
    N = spec.N
    basis = SpinBasis(N)
    evals, evecs = eigensystem(build_total(spec), dense_cap=dense_cap)
    qy = collective_operator(basis, "qy")
    W = qy @ evecs
    means = np.real(np.einsum("is,is->s", evecs.conj(), W))
    seconds = np.real(np.einsum("is,is->s", W.conj(), W))
    f = 4.0 * (seconds - means**2) / N
    tower = build_tower(N, spec.omega, spec.chi)
    C = tower.states.T.conj() @ evecs
    overlaps = np.real(np.einsum("js,js->s", C.conj(), C))
    label = "full+perturbed" if spec.perturbation != 0.0 else "full"
    return EigenScanRecord(energies=evals, qfi_densities=f,
                           scar_overlaps=overlaps, sector=label)


def eigenstate_qfi_scan(spec: HamiltonianSpec, dense_cap: int = DENSE_CAP,
                        method: str = "sector",
                        group_tol: float = 1e-8) -> EigenScanRecord:
    """Energy / QFI density / scar overlap for every eigenstate.

    method="sector" (default) diagonalizes magnetization sectors of the
    unperturbed Hamiltonian and applies the perturbation inside exactly
    degenerate groups; method="dense" factorizes the full perturbed
    matrix (slow beyond N=6, kept as a cross-check).
    """
    if method == "dense":
        return _scan_dense(spec, dense_cap)
    if method != "sector":
        raise ValueError(f"unknown scan method {method!r}")

    N = spec.N
    basis = SpinBasis(N)
    H0 = build_total(dataclasses.replace(spec, perturbation=0.0))
    qy = collective_operator(basis, "qy")
    qy2 = (qy @ qy).tocsr()
    tower = build_tower(N, spec.omega, spec.chi)

    sector_data = []  # (indices, evals, evecs) per magnetization block
    E_parts, f_parts, ov_parts = [], [], []
    for M in range(-N, N + 1):
        sector = magnetization_sector(basis, M)
        if sector.size > dense_cap:
            raise CapacityError(
                f"sector M={M} has dimension {sector.size} above the cap "
                f"{dense_cap}; reduce N")
        idx = sector.indices
        w, v = la.eigh(_dense_hermitian(restrict(H0, sector)))
        sector_data.append((idx, v))
        # <Qy> vanishes inside a magnetization sector (Qy shifts M by 2),
        # so each variance is just the diagonal block of Qy^2
        A = qy2[idx, :][:, idx]
        W = A @ v
        var = np.real(np.einsum("is,is->s", v.conj(), W))
        C = tower.states[idx, :].T.conj() @ v
        E_parts.append(w)
        f_parts.append(4.0 * var / N)
        ov_parts.append(np.real(np.einsum("js,js->s", C.conj(), C)))

    all_E = np.concatenate(E_parts)
    all_f = np.concatenate(f_parts)
    all_ov = np.concatenate(ov_parts)
    owner = np.concatenate([np.full(len(w), k)
                            for k, w in enumerate(E_parts)])
    local = np.concatenate([np.arange(len(w)) for w in E_parts])
    order = np.argsort(all_E, kind="stable")
    all_E, all_f, all_ov = all_E[order], all_f[order], all_ov[order]
    owner, local = owner[order], local[order]

    if spec.perturbation != 0.0:
        scale = max(1.0, float(np.abs(all_E).max()))
        thresh = max(group_tol * scale, 10.0 * abs(spec.perturbation))
        breaks = np.nonzero(np.diff(all_E) > thresh)[0] + 1
        dim = basis.dim_full
        qx = collective_operator(basis, "qx")
        for grp in np.split(np.arange(len(all_E)), breaks):
            if len(grp) < 2:
                continue
            # embed the (near-)degenerate states and re-diagonalize with
            # the perturbation to first and second order; second order is
            # required because Q^x changes M by 2, so a multiplet inside
            # one magnetization sector has no first-order coupling at all
            G = np.zeros((dim, len(grp)), dtype=complex)
            for col, i in enumerate(grp):
                idx, v = sector_data[owner[i]]
                G[idx, col] = v[:, local[i]]
            W = qx @ G
            e_ref = float(all_E[grp].mean())
            # Work relative to e_ref and flatten roundoff-level spread in
            # the unperturbed energies: an exactly degenerate multiplet must
            # enter the effective block with exactly equal diagonals, or the
            # ~1e-15 eigensolver noise swamps the eps^2-scale splittings
            # this block exists to resolve.
            d = all_E[grp] - e_ref
            deg_tol = 1e4 * np.finfo(float).eps * scale
            cuts = np.nonzero(np.diff(d) > deg_tol)[0] + 1
            for piece in np.split(np.arange(len(d)), cuts):
                d[piece] = d[piece].mean()
            block = (np.diag(d).astype(complex)
                     + spec.perturbation * (G.conj().T @ W))
            for (idx, v), w_s in zip(sector_data, E_parts):
                keep = np.abs(w_s - e_ref) > thresh
                if not keep.any():
                    continue
                C = v[:, keep].conj().T @ W[idx, :]
                inv = 1.0 / (e_ref - w_s[keep])
                block += spec.perturbation**2 * (C.conj().T * inv) @ C
            ge, gv = la.eigh(block)
            ge += e_ref
            states = G @ gv
            Wy = qy @ states
            means = np.real(np.einsum("is,is->s", states.conj(), Wy))
            var = np.real(np.einsum("is,is->s", Wy.conj(), Wy)) - means**2
            C = tower.states.T.conj() @ states
            all_E[grp] = ge
            all_f[grp] = 4.0 * var / N
            all_ov[grp] = np.real(np.einsum("js,js->s", C.conj(), C))
        order = np.argsort(all_E, kind="stable")
        all_E, all_f, all_ov = all_E[order], all_f[order], all_ov[order]

    label = "full+perturbed" if spec.perturbation != 0.0 else "full"
    return EigenScanRecord(energies=all_E, qfi_densities=all_f,
                           scar_overlaps=all_ov, sector=label)


def gap_ratio(energies: np.ndarray, min_levels: int = 100) -> float:
    """Mean consecutive-gap ratio r of a sorted level sequence.

    r_k = min(d_k, d_{k+1}) / max(d_k, d_{k+1}); ~0.386 for Poisson
    statistics, ~0.531 for GOE.  Must be fed levels from a single
    symmetry sector or the statistic is diluted toward Poisson.
    """
    E = np.sort(np.asarray(energies, dtype=float))
    if len(E) < min_levels:
        raise ValueError(f"need at least {min_levels} levels, got {len(E)}")
    d = np.diff(E)
    lo = np.minimum(d[:-1], d[1:])
    hi = np.maximum(d[:-1], d[1:])
    ok = hi > 0
    return float(np.mean(lo[ok] / hi[ok]))


def reversal_inversion_parity_levels(spec: HamiltonianSpec, parity: int,
                                     M: int = 0,
                                     dense_cap: int = DENSE_CAP) -> np.ndarray:
    """Eigenvalues of one hidden-parity block of a magnetization sector.

    Reversing the chain and simultaneously swapping the +1 and -1 levels
    on every site commutes with the full Hamiltonian inside the M=0
    sector at every eta: each operation alone maps eta -> -eta in the
    hopping phases, so their composition restores them, and the omega
    term this composition negates vanishes at M=0.  The sector therefore
    carries a hidden Z2 label, and level statistics taken over the
    unsplit sector mix two independent sequences (pulling the mean gap
    ratio down to ~0.42 even for fully chaotic blocks).  This returns
    the sorted levels of a single parity block, the only sequence whose
    gap ratio is meaningful.
    """
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    if spec.perturbation != 0.0:
        raise ValueError("parity-resolved levels require zero perturbation "
                         "(Q^x breaks magnetization conservation)")
    basis = SpinBasis(spec.N)
    sector = magnetization_sector(basis, M)
    if sector.size > dense_cap:
        raise CapacityError(
            f"sector M={M} has dimension {sector.size} above the cap "
            f"{dense_cap}; reduce N")
    B = restrict(build_total(spec), sector).tocsr()
    digs = [tuple(basis.digits(b)) for b in sector.indices]
    pos = {d: i for i, d in enumerate(digs)}
    perm = np.array([pos[tuple(2 - np.asarray(d))[::-1]] for d in digs])
    own = np.arange(sector.size)
    fixed = own[perm == own]
    lo = own[perm > own]
    n_cols = (len(fixed) if parity == 1 else 0) + len(lo)
    V = np.zeros((sector.size, n_cols))
    col = 0
    if parity == 1:
        V[fixed, np.arange(len(fixed))] = 1.0
        col = len(fixed)
    amp = 1.0 / np.sqrt(2.0)
    cols = col + np.arange(len(lo))
    V[lo, cols] = amp
    V[perm[lo], cols] = parity * amp
    return la.eigvalsh(V.T @ (B @ V))


def poisson_gap_ratio(n_levels: int, seed: int) -> float:
    """Calibration: r for independent uniform levels (Poisson spacing)."""
    rng = np.random.default_rng(seed)
    return gap_ratio(rng.uniform(size=n_levels))


def goe_gap_ratio(dim: int, samples: int, seed: int) -> float:
    """Calibration: mean r over GOE matrices (central 80% of each spectrum)."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(samples):
        A = rng.normal(size=(dim, dim))
        w = la.eigvalsh(A + A.T)
        keep = w[int(0.1 * dim):int(0.9 * dim)]
        vals.append(gap_ratio(keep))
    return float(np.mean(vals))
