"""Quantum Fisher information for pure and mixed states.

For a pure state F = 4 Var(O); for a density matrix with spectral data
(p_n, |n>) the general formula

    F = 2 sum_{n,m} (p_n - p_m)^2 / (p_n + p_m) |<n|O|m>|^2

applies, with terms skipped when p_n + p_m < 1e-14 (both states absent
from the mixture).  The density f = F/N witnesses entanglement: f > m
certifies at least (m+1)-partite entanglement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QfiResult:
    value: float
    density: float
    observable_label: str


_TERM_SKIP = 1e-14


def qfi_pure(state: np.ndarray, O, N: int, label: str = "O") -> QfiResult:
    """F = 4(<O^2> - <O>^2) for a normalized pure state."""
    state = np.asarray(state)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalized (norm {norm!r})")
    w = O @ state
    mean = np.real(np.vdot(state, w))
    second = np.real(np.vdot(w, w))
    F = 4.0 * (second - mean**2)
    return QfiResult(value=float(F), density=float(F / N), observable_label=label)


def qfi_mixed(probs: np.ndarray, vectors: np.ndarray, O, N: int,
              label: str = "O") -> QfiResult:
    """General QFI from the spectral decomposition of a density matrix.

    `vectors` holds the eigenvectors as columns, matching `probs`.  The
    double sum runs over the supplied decomposition only (pairs whose
    probabilities sum below the skip threshold drop out);  pass the
    complete eigenbasis -- zero-probability eigenvectors included, as an
    eigh of the density matrix returns it -- when the cross terms into
    the kernel matter, e.g. to recover the pure-state value from a
    rank-1 density matrix.
    """
    p = np.asarray(probs, dtype=float)
    if p.min() < -1e-12:
        raise ValueError("negative probability")
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValueError("probabilities do not sum to 1")
    p = np.clip(p, 0.0, None)
    V = np.asarray(vectors)
    ov = V.conj().T @ (O @ V)  # matrix elements <n|O|m>
    pn = p[:, None]
    pm = p[None, :]
    denom = pn + pm
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(denom > _TERM_SKIP, (pn - pm) ** 2 / denom, 0.0)
    F = 2.0 * float(np.real(np.sum(weight * np.abs(ov) ** 2)))
    return QfiResult(value=F, density=F / N, observable_label=label)


def witness_bound(f: float) -> int:
    """Largest integer m with f > m; witnessed depth is m + 1.

    For f in (m, m+1] the bound is m, so any f <= 1 gives 0 (consistent
    with product coherent states, which sit exactly at f = 1).
    """
    if f < 0:
        raise ValueError("QFI density cannot be negative")
    m = int(np.ceil(f)) - 1
    return max(m, 0)
