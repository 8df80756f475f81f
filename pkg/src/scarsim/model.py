"""Lattice geometry, spin-1 product basis, and sparse operator assembly.

Conventions, fixed once for every file format and cross-check in the
package:

* sites live on a d-dimensional cubic lattice with N sites total (N^(1/d)
  per side) inside a fixed volume L^d, so the spacing a = L / (N^(1/d) - 1)
  shrinks as sites are added;
* basis index b encodes the product configuration in ternary with site 0
  as the fastest-varying digit; digits (0, 1, 2) are levels (-1, 0, +1);
* collective ladder operators carry a 1/2 prefactor,
  Q^+ = (1/2) sum_n (S^+_n)^2, which closes the SU(2) algebra exactly:
  [Q^+, Q^-] = 2 Q^z and [Q^z, Q^pm] = +/- Q^pm.

Operators are plain scipy.sparse CSR matrices; hermitian ones are built
entry-conjugate-paired so `hermiticity_defect` is exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class LatticeSpec:
    """Cubic lattice in a fixed volume with power-law couplings.

    Attributes
    ----------
    d : int
        Spatial dimension.
    L : float
        Linear size of the volume; the volume is L^d.
    N : int
        Total number of sites; N^(1/d) must be an integer >= 2.
    gamma : float
        Power-law exponent of the couplings (gamma >= 0).
    lam : float
        Coupling prefactor (the config key for this field is "lambda").
    """

    d: int
    L: float
    N: int
    gamma: float
    lam: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not np.isfinite(self.lam):
            raise ValueError("lambda must be finite")
        side = self.side
        if side < 2 or side**self.d != self.N:
            raise ValueError(
                f"N={self.N} does not fill a cubic lattice in d={self.d}: "
                f"N^(1/d) must be an integer >= 2")

    @property
    def side(self) -> int:
        """Sites per linear dimension, N^(1/d) rounded to the nearest integer."""
        return round(self.N ** (1.0 / self.d))

    @property
    def spacing(self) -> float:
        """Lattice constant a = L / (N^(1/d) - 1)."""
        return self.L / (self.side - 1)

    def positions(self) -> np.ndarray:
        """Integer lattice coordinates, shape (N, d); site n = row n.

        Site index runs over the lattice in row-major order with the first
        coordinate fastest.
        """
        side = self.side
        coords = np.empty((self.N, self.d), dtype=np.int64)
        n = np.arange(self.N)
        for k in range(self.d):
            coords[:, k] = (n // side**k) % side
        return coords


def coupling_matrix(lattice: LatticeSpec) -> np.ndarray:
    """Symmetric coupling matrix lambda_{nn'} = lam / (a * |n - n'|)^gamma.

    |n - n'| is the Euclidean distance in lattice-index units and a the
    spacing, so the physical distance a*|n - n'| enters the power law.
    The diagonal is zero (no self-coupling); open boundary, no periodic
    images.
    """
    pos = lattice.positions().astype(float)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = lattice.lam / (lattice.spacing * dist) ** lattice.gamma
    np.fill_diagonal(lam, 0.0)
    return lam


class SpinBasis:
    """Spin-1 product basis for N sites, or a magnetization-sector view of it.

    The full basis has dimension 3^N with basis index b = sum_n digit_n 3^n,
    digit_n = m_n + 1.  A sector view carries the sorted full-basis indices
    of its members in `indices`.
    """

    def __init__(self, N: int, indices: np.ndarray | None = None,
                 label: str = "full"):
        if N < 1:
            raise ValueError("N must be >= 1")
        self.N = int(N)
        self.label = label
        self.indices = None if indices is None else np.asarray(indices, dtype=np.int64)

    @property
    def dim_full(self) -> int:
        return 3**self.N

    @property
    def size(self) -> int:
        return self.dim_full if self.indices is None else len(self.indices)

    def digits(self, b: np.ndarray | int) -> np.ndarray:
        """Ternary digits (levels + 1) of full-basis indices; shape (..., N)."""
        b = np.asarray(b)
        return np.stack([(b // 3**n) % 3 for n in range(self.N)], axis=-1)

    def index_of_levels(self, levels) -> int:
        """Full-basis index of a configuration given site levels in -1/0/+1."""
        levels = np.asarray(levels, dtype=np.int64)
        if levels.shape != (self.N,) or np.any(np.abs(levels) > 1):
            raise ValueError("levels must be N values in {-1, 0, +1}")
        return int(((levels + 1) * 3 ** np.arange(self.N)).sum())

    def magnetizations(self) -> np.ndarray:
        """Total magnetization sum_n m_n for every full-basis index."""
        total = np.zeros(self.dim_full, dtype=np.int64)
        b = np.arange(self.dim_full)
        for n in range(self.N):
            total += (b // 3**n) % 3 - 1
        return total


def magnetization_sector(basis: SpinBasis, M: int) -> SpinBasis:
    """Sector view of all product states with total magnetization M."""
    if not -basis.N <= M <= basis.N:
        raise ValueError(f"M={M} out of range for N={basis.N}")
    idx = np.nonzero(basis.magnetizations() == M)[0]
    return SpinBasis(basis.N, indices=idx, label=f"M={M}")


_UP_AMP = np.sqrt([2.0, 2.0, 0.0])     # S^+ amplitude by source digit
_DOWN_AMP = np.sqrt([0.0, 2.0, 2.0])   # S^- amplitude by source digit


def local_operator(basis: SpinBasis, site: int, kind: str) -> sp.csr_matrix:
    """Single-site spin-1 operator embedded in the full product space.

    kind is one of "sz", "s+", "s-"; S^+|m> = sqrt(2 - m(m+1)) |m+1>.
    """
    if not 0 <= site < basis.N:
        raise ValueError(f"site {site} out of range")
    dim = basis.dim_full
    b = np.arange(dim, dtype=np.int64)
    d = (b // 3**site) % 3
    if kind == "sz":
        return sp.csr_matrix((1.0 * (d - 1), (b, b)), shape=(dim, dim))
    if kind == "s+":
        src = b[d <= 1]
        amp = _UP_AMP[d[d <= 1]]
        return sp.csr_matrix((amp, (src + 3**site, src)), shape=(dim, dim))
    if kind == "s-":
        src = b[d >= 1]
        amp = _DOWN_AMP[d[d >= 1]]
        return sp.csr_matrix((amp, (src - 3**site, src)), shape=(dim, dim))
    raise ValueError(f"unknown operator kind {kind!r}")


def collective_operator(basis: SpinBasis, kind: str) -> sp.csr_matrix:
    """Half-normalized collective operator on the full product space.

    Q^+ = (1/2) sum_n (S^+_n)^2 flips one site from -1 to +1 with unit
    amplitude; Q^- is its adjoint; Q^z = (1/2) sum_n S^z_n;
    Q^x = (Q^+ + Q^-)/2 and Q^y = (i/2)(Q^- - Q^+).
    """
    dim = basis.dim_full
    b = np.arange(dim, dtype=np.int64)
    if kind == "qz":
        return sp.csr_matrix((basis.magnetizations() / 2.0, (b, b)),
                             shape=(dim, dim))
    if kind in ("q+", "q-"):
        rows_all, cols_all = [], []
        for n in range(basis.N):
            d = (b // 3**n) % 3
            src = b[d == 0]
            rows_all.append(src + 2 * 3**n)
            cols_all.append(src)
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        data = np.ones(len(rows))
        if kind == "q-":
            rows, cols = cols, rows
        return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
    if kind == "qx":
        qp = collective_operator(basis, "q+")
        return ((qp + qp.T) * 0.5).tocsr()
    if kind == "qy":
        qp = collective_operator(basis, "q+")
        return (0.5j * (qp.T - qp)).tocsr()
    raise ValueError(f"unknown operator kind {kind!r}")


def restrict(op: sp.spmatrix, sector: SpinBasis) -> sp.csr_matrix:
    """Cut a full-space operator down to a sector view's rows and columns."""
    if sector.indices is None:
        return op.tocsr()
    return op.tocsr()[sector.indices, :][:, sector.indices]


def hermiticity_defect(op: sp.spmatrix) -> float:
    """Largest absolute entry of A - A^dagger."""
    diff = (op - op.conj().T).tocoo()
    return 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())


def export_operator(op: sp.spmatrix, path) -> None:
    """Write an operator as coordinate-list text: one "row col re im" line
    per stored entry, 17-significant-digit floats, sorted by (row, col)."""
    coo = op.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for k in order:
            v = complex(coo.data[k])
            fh.write(f"{coo.row[k]} {coo.col[k]} {v.real:.17g} {v.imag:.17g}\n")


def import_operator(path, dim: int) -> sp.csr_matrix:
    """Read an operator written by `export_operator`."""
    rows, cols, data = [], [], []
    with open(path) as fh:
        for line in fh:
            r, c, re, im = line.split()
            rows.append(int(r))
            cols.append(int(c))
            data.append(complex(float(re), float(im)))
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
