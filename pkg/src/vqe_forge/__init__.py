"""VQE for the H2 potential energy surface on a dense state-vector simulator."""

__version__ = "0.1.0"

from .chem import build_h2_hamiltonian, run_hartree_fock
from .pauli import PauliTerm, QubitHamiltonian, canonicalize, exact_ground_energy
from .statevector import Gate, StateVector, apply_gate, basis_state, expectation
from .sweep import SweepConfig, run_scaling_study, run_sweep
from .vqe import AdamConfig, AnsatzSpec, run_vqe

__all__ = [
    "AdamConfig", "AnsatzSpec", "Gate", "PauliTerm", "QubitHamiltonian", "StateVector",
    "SweepConfig", "apply_gate", "basis_state", "build_h2_hamiltonian", "canonicalize",
    "exact_ground_energy", "expectation", "run_hartree_fock", "run_scaling_study",
    "run_sweep", "run_vqe",
]
