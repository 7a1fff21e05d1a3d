"""Quasi-exactly-solvable Z3 parafermion chain.

Exact algebra, Hamiltonians, closed-form ground states, sector-resolved
spectra, domain-wall and edge-mode analyses, and a charge-conserving DMRG.
"""

__version__ = "0.1.0"

from .algebra import OMEGA, CycMatrix
from .dmrg import dmrg_excited, dmrg_gap, dmrg_ground
from .groundstate import build_gs_vector
from .model import ModelParams, build_parent, compare_parent, hamiltonian
from .spectra import spectrum_table

__all__ = [
    "__version__",
    "OMEGA",
    "CycMatrix",
    "ModelParams",
    "hamiltonian",
    "build_parent",
    "compare_parent",
    "build_gs_vector",
    "spectrum_table",
    "dmrg_ground",
    "dmrg_excited",
    "dmrg_gap",
]
