"""Conditional displacement and squeezing of trapped-ion motion.

Simulates multichromatic sideband drives on a string of ions, prepares
Schrodinger-cat, entangled coherent and squeezed states, and checks them
against closed-form targets.
"""

from .errors import (
    DegenerateOutcomeError,
    DimensionError,
    ExpmConvergenceError,
    TruncationError,
    TruncationWarning,
)
from .fock import FockSpace, coherent_state, matrix_exponential, squeezed_vacuum_state
from .spin import IonRegister, jx_product_basis, jx_product_eigenstate
from .dynamics import (
    DriveConfig,
    JointSpace,
    TrapConfig,
    effective_hamiltonian,
    evolve,
    propagator_closed_form,
    propagator_numerical,
)
from .scenarios import CATALOG, ScenarioSpec, make_spec, measure_internal, reference_state, run_scenario
from .analysis import fidelity, parity_expectation, squeezing_axes, wigner_grid

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "DegenerateOutcomeError",
    "DimensionError",
    "DriveConfig",
    "ExpmConvergenceError",
    "FockSpace",
    "IonRegister",
    "JointSpace",
    "ScenarioSpec",
    "TrapConfig",
    "TruncationError",
    "TruncationWarning",
    "coherent_state",
    "effective_hamiltonian",
    "evolve",
    "fidelity",
    "jx_product_basis",
    "jx_product_eigenstate",
    "make_spec",
    "matrix_exponential",
    "measure_internal",
    "parity_expectation",
    "propagator_closed_form",
    "propagator_numerical",
    "reference_state",
    "run_scenario",
    "squeezed_vacuum_state",
    "squeezing_axes",
    "wigner_grid",
]
