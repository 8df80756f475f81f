"""Standalone invariant suite over the package's load-bearing algebra.

Each check exercises one structural property end to end -- operator
algebra, conservation laws, backend agreement, projector and quadrature
identities -- and reports the measured defect against its tolerance.
The suite is what the command-line `verify` experiment runs; it is
deliberately cheap enough to execute before trusting any larger run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import coherent_state, evolve
from .hamiltonian import HamiltonianSpec, build_total
from .husimi import default_quadrature, localization_integral, \
    sphere_quadrature
from .model import LatticeSpec, SpinBasis, collective_operator, \
    hermiticity_defect
from .scars import build_tower


@dataclass(frozen=True)
class VerifyResult:
    name: str
    passed: bool
    detail: str


def _check(name: str, value: float, tol: float) -> VerifyResult:
    return VerifyResult(name=name, passed=bool(value < tol),
                        detail=f"defect {value:.3e} (tolerance {tol:g})")


def _spec(N: int, omega: float = 1.0, eta: float = 0.7, chi: float = 2.0,
          perturbation: float = 0.0) -> HamiltonianSpec:
    lattice = LatticeSpec(d=1, L=10.0, N=N, gamma=2.0, lam=1.0)
    return HamiltonianSpec(lattice=lattice, omega=omega, eta=eta, chi=chi,
                           perturbation=perturbation)


def check_su2_closure(N: int = 4) -> VerifyResult:
    basis = SpinBasis(N)
    qp = collective_operator(basis, "q+")
    qm = collective_operator(basis, "q-")
    qz = collective_operator(basis, "qz")
    defect = max(abs((qp @ qm - qm @ qp) - 2 * qz).max(),
                 abs((qz @ qp - qp @ qz) - qp).max(),
                 abs((qz @ qm - qm @ qz) + qm).max())
    return _check("su2-closure", float(defect), 1e-12)


def check_hermiticity(N: int = 4) -> VerifyResult:
    worst = 0.0
    for eta in (0.0, 0.7, math.pi / 2):
        H = build_total(_spec(N, eta=eta, perturbation=1e-3))
        worst = max(worst, hermiticity_defect(H))
    return _check("hermiticity", worst, 1e-12)


def check_magnetization_conservation(N: int = 4) -> VerifyResult:
    H = build_total(_spec(N))
    qz = collective_operator(SpinBasis(N), "qz")
    defect = abs(H @ qz - qz @ H).max()
    return _check("magnetization-conservation", float(defect), 1e-12)


def check_norm_energy_conservation(N: int = 5) -> VerifyResult:
    spec = _spec(N, eta=math.pi / 2)
    psi0 = coherent_state(N, math.pi / 2, 0.0)
    times = np.linspace(0.0, 3.0, 13)
    traj = evolve(spec, psi0, times, backend="krylov")
    norms = np.linalg.norm(traj.states, axis=0)
    H = build_total(spec)
    energies = np.real(np.einsum("ik,ik->k", traj.states.conj(),
                                 H @ traj.states))
    scale = max(1.0, abs(energies[0]))
    norm_defect = float(np.abs(norms - 1.0).max())
    energy_defect = float(np.abs(energies - energies[0]).max() / scale)
    ok = norm_defect < 1e-9 and energy_defect < 1e-8
    return VerifyResult(
        name="norm-energy-conservation", passed=ok,
        detail=f"norm drift {norm_defect:.3e} (tolerance 1e-09), "
               f"energy drift {energy_defect:.3e} (tolerance 1e-08)")


def check_backend_equivalence(N: int = 6) -> VerifyResult:
    spec = _spec(N, eta=math.pi / 2)
    psi0 = coherent_state(N, math.pi / 2, 0.0)
    times = np.linspace(0.2, 1.4, 4)
    dense = evolve(spec, psi0, times, backend="dense-eig")
    krylov = evolve(spec, psi0, times, backend="krylov")
    defect = float(np.abs(dense.states - krylov.states).max())
    return _check("backend-equivalence", defect, 1e-8)


def check_projector_idempotency(N: int = 6,
                                rng: np.random.Generator | None = None
                                ) -> VerifyResult:
    rng = rng or np.random.default_rng(7)
    tower = build_tower(N)
    worst = tower.gram_defect()
    for _ in range(5):
        psi = rng.standard_normal(3 ** N) + 1j * rng.standard_normal(3 ** N)
        psi /= np.linalg.norm(psi)
        once = tower.project(psi)
        twice = tower.project(once)
        worst = max(worst, float(np.linalg.norm(twice - once)))
    return _check("projector-idempotency", worst, 1e-12)


def check_quadrature_exactness(N: int = 5,
                               rng: np.random.Generator | None = None
                               ) -> VerifyResult:
    rng = rng or np.random.default_rng(11)
    quad = default_quadrature(N)
    area = abs(quad.theta_weights.sum() * quad.phi_weight * quad.n_phi
               - 4 * math.pi)
    psi = rng.standard_normal(3 ** N) + 1j * rng.standard_normal(3 ** N)
    psi /= np.linalg.norm(psi)
    lo = localization_integral(psi, quad)
    hi = localization_integral(psi, sphere_quadrature(4 * N, 8 * N))
    return _check("quadrature-exactness", max(float(area), abs(lo - hi)),
                  1e-12)


def run_verification(seed: int = 7) -> list[VerifyResult]:
    rng = np.random.default_rng(seed)
    return [
        check_su2_closure(),
        check_hermiticity(),
        check_magnetization_conservation(),
        check_norm_energy_conservation(),
        check_backend_equivalence(),
        check_projector_idempotency(rng=rng),
        check_quadrature_exactness(rng=rng),
    ]


def format_table(results: list[VerifyResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  "
             f"{r.detail}" for r in results]
    return "\n".join(lines)


def all_passed(results: list[VerifyResult]) -> bool:
    return all(r.passed for r in results)
