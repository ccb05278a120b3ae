"""Linear-optics simulator for N-photon hyperentanglement concentration."""

from .devices import (
    DetectorModel,
    build_improved_ppc,
    build_ppc,
    build_spc,
    build_spm,
    classify_event,
)
from .fock import FockState, ModeId, ModeTable, StateParams, fidelity, inner_product, project_counts, superpose
from .optics import OpticalCircuit, apply_circuit, compose, element_matrix
from .oracle import permanent, transition_amplitude
from .protocol import (
    ProtocolConfig,
    build_input,
    classify_signs,
    flip_second_copy,
    run_auxiliary,
    run_exact,
    run_shots,
    target_state,
)

__version__ = "0.1.0"

__all__ = [
    "DetectorModel",
    "FockState",
    "ModeId",
    "ModeTable",
    "OpticalCircuit",
    "ProtocolConfig",
    "StateParams",
    "apply_circuit",
    "build_improved_ppc",
    "build_input",
    "build_ppc",
    "build_spc",
    "build_spm",
    "classify_event",
    "classify_signs",
    "compose",
    "element_matrix",
    "fidelity",
    "flip_second_copy",
    "inner_product",
    "permanent",
    "project_counts",
    "run_auxiliary",
    "run_exact",
    "run_shots",
    "superpose",
    "target_state",
    "transition_amplitude",
]
