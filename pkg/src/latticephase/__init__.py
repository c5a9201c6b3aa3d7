"""Phase diagrams of Gaussian-weighted lattice energies over two-dimensional lattice shapes."""
from .halfplane import HEXAGONAL, SQUARE, HalfPlanePoint, reduce_to_fundamental
from .jacobi_theta import TruncationBudget, theta1
from .lattice_energy import M_SPEC, THETA, W2, PotentialSpec, energy, w_sum, w_sum_bruteforce
from .lemma_audit import GridSpec, audit
from .phase_solver import (Mode, PhaseKind, global_minimize, phase_diagram, solve_alpha_a, solve_alpha_b,
                           thresholds_for_gamma, y_alpha)

__all__ = [
    "HEXAGONAL", "SQUARE", "HalfPlanePoint", "reduce_to_fundamental", "TruncationBudget", "theta1",
    "M_SPEC", "THETA", "W2", "PotentialSpec", "energy", "w_sum", "w_sum_bruteforce", "GridSpec", "audit",
    "Mode", "PhaseKind", "global_minimize", "phase_diagram", "solve_alpha_a", "solve_alpha_b",
    "thresholds_for_gamma", "y_alpha",
]
