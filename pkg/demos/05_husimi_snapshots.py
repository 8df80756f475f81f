"""Print coarse Husimi maps of the quench: squeezing, plateau, cat.

The collective Husimi distribution lives on a sphere; its localization
integral I equals the weight the state keeps inside the scar subspace.
This script renders text heat-maps at characteristic times of the
scarred quench — the equatorial blob stretches, wraps, and finally
splits into the two antipodal lobes of the cat state, all at I = 1.
"""
import math

import numpy as np

from scarsim.dynamics import coherent_state, evolve
from scarsim.hamiltonian import HamiltonianSpec
from scarsim.husimi import localization_integral, sphere_quadrature
from scarsim.model import LatticeSpec

N, CHI = 6, 2.0
SHADES = " .:-=+*#%@"


def render(psi, quad):
    values = np.array([[float(abs(np.vdot(psi, _coh(th, ph))) ** 2)
                        for ph in quad.phi_nodes]
                       for th in quad.theta_nodes])
    top = values.max()
    for row in values:
        print("    " + "".join(
            SHADES[min(int(v / top * (len(SHADES) - 1)), len(SHADES) - 1)]
            for v in row))


def _coh(theta, phi):
    return coherent_state(N, theta, phi)


def main():
    spec = HamiltonianSpec(
        lattice=LatticeSpec(d=1, L=10.0, N=N, gamma=2.0, lam=1.0),
        omega=0.0, eta=math.pi / 2, chi=CHI)
    t_star = math.pi * N / (2 * CHI)
    times = np.array([1e-3, 0.25 * t_star, 0.5 * t_star, t_star])
    traj = evolve(spec, coherent_state(N, math.pi / 2, 0.0), times)
    coarse = sphere_quadrature(15, 40)
    fine = sphere_quadrature(N + 1, 2 * N + 2)
    for k, t in enumerate(times):
        psi = traj.states[:, k]
        I = localization_integral(psi, fine)
        print(f"t = {t:.4f}  (t* = {t_star:.4f}),  I = {I:.12f}")
        render(psi, coarse)
        print()


if __name__ == "__main__":
    main()
