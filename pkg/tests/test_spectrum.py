"""Sector diagonalization, eigenstate QFI scans, and gap-ratio statistics."""
import math

import numpy as np
import pytest

from scarsim.errors import CapacityError
from scarsim.hamiltonian import HamiltonianSpec, build_total
from scarsim.model import LatticeSpec, SpinBasis, magnetization_sector, restrict
from scarsim.spectrum import (
    EigenScanRecord,
    eigensystem,
    eigenstate_qfi_scan,
    gap_ratio,
    goe_gap_ratio,
    poisson_gap_ratio,
    reversal_inversion_parity_levels,
)

POISSON_R = 2 * math.log(2) - 1  # 0.38629...
GOE_R = 0.5307


def make_spec(N, omega=2.0, eta=math.pi / 2, chi=0.0, perturbation=0.0,
              L=10.0, lam=1.0):
    return HamiltonianSpec(
        lattice=LatticeSpec(d=1, L=L, N=N, gamma=2.0, lam=lam),
        omega=omega, eta=eta, chi=chi, perturbation=perturbation)


def test_field_term_alone_gives_magnetization_ladder():
    # with lambda = 0 and chi = 0 the spectrum is omega * M/2 with
    # multiplicities counted by the trinomial coefficients
    omega = 1.7
    spec = make_spec(3, omega=omega, lam=0.0)
    evals, _ = eigensystem(build_total(spec))
    counts = np.array([1.0])
    for _ in range(3):
        counts = np.convolve(counts, [1.0, 1.0, 1.0])
    expected = np.concatenate(
        [np.full(int(c), omega * M / 2.0)
         for M, c in zip(range(-3, 4), counts)])
    np.testing.assert_allclose(np.sort(evals), np.sort(expected), atol=1e-12)


def test_two_site_spectrum_matches_hand_blocks():
    # L=1 with two sites puts the pair at unit distance, so the hop
    # amplitude is 2*lam in every magnetization block; diagonalizing the
    # 1-, 2-, and 3-dimensional blocks by hand gives the full nine-level
    # set, independent of eta
    omega, lam = 1.3, 1.0
    for eta in (0.0, 0.7, math.pi / 2):
        spec = make_spec(2, omega=omega, eta=eta, L=1.0, lam=lam)
        evals, _ = eigensystem(build_total(spec))
        expected = np.sort([
            -omega, omega,
            -omega / 2 - 2 * lam, -omega / 2 + 2 * lam,
            omega / 2 - 2 * lam, omega / 2 + 2 * lam,
            -2 * math.sqrt(2) * lam, 0.0, 2 * math.sqrt(2) * lam,
        ])
        np.testing.assert_allclose(np.sort(evals), expected, atol=1e-12)


def test_eigensystem_orthonormal_and_reconstructs():
    spec = make_spec(3, chi=2.0, eta=0.4)
    H = build_total(spec)
    evals, evecs = eigensystem(H)
    gram = evecs.conj().T @ evecs
    assert np.abs(gram - np.eye(len(evals))).max() < 1e-10
    resid = np.abs(H @ evecs - evecs * evals).max()
    norm = np.abs(H.toarray()).max()
    assert resid < 1e-9 * norm


def test_eigensystem_respects_dense_cap():
    spec = make_spec(4)
    with pytest.raises(CapacityError):
        eigensystem(build_total(spec), dense_cap=10)


def test_record_validation():
    e = np.array([0.0, 1.0])
    f = np.array([1.0, 2.0])
    ov = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        EigenScanRecord(energies=e, qfi_densities=f[:1], scar_overlaps=ov,
                        sector="full")
    with pytest.raises(ValueError):
        EigenScanRecord(energies=e[::-1].copy(), qfi_densities=f,
                        scar_overlaps=ov, sector="full")
    with pytest.raises(ValueError):
        EigenScanRecord(energies=e, qfi_densities=f,
                        scar_overlaps=np.array([0.0, 1.5]), sector="full")
    rec = EigenScanRecord(energies=e, qfi_densities=f, scar_overlaps=ov,
                          sector="full")
    assert rec.scar_indices().tolist() == [1]


def test_record_csv_round_trip(tmp_path):
    rec = EigenScanRecord(energies=np.array([-1.0, 2.0]),
                          qfi_densities=np.array([0.5, 3.0]),
                          scar_overlaps=np.array([0.0, 1.0]),
                          sector="full+perturbed")
    path = tmp_path / "scan.csv"
    rec.write_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "energy,qfi_density,scar_overlap,sector"
    assert len(lines) == 3
    fields = lines[2].split(",")
    assert float(fields[0]) == 2.0
    assert fields[3] == "full+perturbed"


def test_sector_scan_matches_dense_anharmonic():
    # chi=2 splits every scar rung away from the thermal bulk, so the
    # perturbative selection and the literal dense factorization must
    # agree essentially to machine precision
    spec = make_spec(5, chi=2.0, perturbation=1e-5)
    sector = eigenstate_qfi_scan(spec)
    dense = eigenstate_qfi_scan(spec, method="dense")
    np.testing.assert_allclose(sector.energies, dense.energies, atol=1e-8)
    np.testing.assert_allclose(sector.qfi_densities, dense.qfi_densities,
                               atol=1e-6)
    np.testing.assert_allclose(sector.scar_overlaps, dense.scar_overlaps,
                               atol=1e-9)
    assert len(sector.scar_indices()) == 6
    assert len(dense.scar_indices()) == 6


def test_sector_scan_matches_dense_harmonic():
    # chi=0 buries each scar inside an exactly degenerate multiplet of
    # its own magnetization sector.  The scar ladder stays an invariant
    # subspace of the perturbed operator, so the perturbative selection
    # recovers it with weight exactly 1; thermal members of those
    # multiplets are compared loosely because the dense eigensolver
    # cannot cleanly resolve their ~1e-14 effective splittings.
    spec = make_spec(5, perturbation=1e-5)
    sector = eigenstate_qfi_scan(spec)
    dense = eigenstate_qfi_scan(spec, method="dense")
    np.testing.assert_allclose(sector.energies, dense.energies, atol=1e-8)
    iS = sector.scar_indices()
    assert len(iS) == 6
    assert len(dense.scar_indices()) == 6
    np.testing.assert_allclose(sector.scar_overlaps[iS], 1.0, atol=1e-12)
    np.testing.assert_allclose(sector.qfi_densities, dense.qfi_densities,
                               atol=5e-3)


def test_scan_scar_rungs_carry_ladder_qfi():
    # overlap > 0.99 picks out exactly N+1 states whose QFI densities
    # are the ladder values 2[J(J+1) - m^2]/N, peaking at (N+2)/2
    N = 4
    spec = make_spec(N, perturbation=1e-5)
    rec = eigenstate_qfi_scan(spec)
    iS = rec.scar_indices()
    assert len(iS) == N + 1
    J = N / 2.0
    m = np.arange(N + 1) - J
    expected = 2.0 * (J * (J + 1) - m**2) / N
    order = np.argsort(rec.energies[iS])
    np.testing.assert_allclose(rec.qfi_densities[iS][order], expected,
                               atol=1e-6)
    assert abs(rec.qfi_densities[iS].max() - (N + 2) / 2.0) < 1e-6


def test_scan_overlap_sum_rule():
    # the scar projector has trace N+1, distributed over all eigenstates
    spec = make_spec(5, chi=2.0, perturbation=1e-5)
    rec = eigenstate_qfi_scan(spec)
    assert abs(rec.scar_overlaps.sum() - 6.0) < 1e-8
    assert rec.scar_overlaps.min() > -1e-12


def test_gap_ratio_poisson_calibration():
    r = poisson_gap_ratio(100_000, seed=7)
    assert abs(r - POISSON_R) < 0.01


def test_gap_ratio_goe_calibration():
    r = goe_gap_ratio(dim=1000, samples=50, seed=11)
    assert abs(r - GOE_R) < 0.01


def test_gap_ratio_needs_enough_levels():
    with pytest.raises(ValueError):
        gap_ratio(np.linspace(0.0, 1.0, 40))


def test_parity_levels_validation():
    spec = make_spec(5, chi=2.0)
    with pytest.raises(ValueError):
        reversal_inversion_parity_levels(spec, parity=0)
    with pytest.raises(ValueError):
        reversal_inversion_parity_levels(
            make_spec(5, chi=2.0, perturbation=1e-5), parity=1)


def test_parity_blocks_partition_the_sector():
    spec = make_spec(5, chi=2.0)
    basis = SpinBasis(5)
    sector = magnetization_sector(basis, 0)
    even = reversal_inversion_parity_levels(spec, parity=1)
    odd = reversal_inversion_parity_levels(spec, parity=-1)
    assert len(even) + len(odd) == sector.size
    merged = np.sort(np.concatenate([even, odd]))
    full = np.sort(np.linalg.eigvalsh(
        restrict(build_total(spec), sector).toarray()))
    np.testing.assert_allclose(merged, full, atol=1e-10)


def test_central_sector_is_chaotic_once_parity_is_resolved():
    # the raw M=0 sector mixes the two hidden-parity sequences and its
    # mean gap ratio sits near the two-sequence superposition value;
    # each parity block alone lands in the chaotic (GOE) range
    spec = make_spec(9, chi=2.0)
    even = reversal_inversion_parity_levels(spec, parity=1)
    odd = reversal_inversion_parity_levels(spec, parity=-1)
    r_even = gap_ratio(even)
    r_odd = gap_ratio(odd)
    r_mixed = gap_ratio(np.sort(np.concatenate([even, odd])))
    assert abs(r_even - 0.5218) < 2e-3
    assert abs(r_odd - 0.5408) < 2e-3
    assert abs(r_mixed - 0.4154) < 2e-3
    for r in (r_even, r_odd):
        assert abs(r - GOE_R) < 0.02
    assert r_mixed < 0.45
