"""scarsim: spin-1 scarred-lattice simulations.

Library for a spin-1 lattice model hosting an exact tower of collective
eigenstates: operator and Hamiltonian assembly, scar-tower verification,
eigenstate QFI scans, coherent-state twisting dynamics, Husimi
localization, time-reversal echo metrology, and a boson-mediated
derivation of the collective nonlinearity.
"""

__version__ = "0.1.0"
