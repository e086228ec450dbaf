"""Map qudit Hamiltonians onto single bosonic modes, transpile them into SNAIL
and cross-Kerr gates, and simulate the resulting circuits on truncated Fock
spaces."""
from .fock import BosonicOperator, SbmHamiltonian, sbm_map
from .simulate import FockState, PopulationSeries, propagate_dynamics, run_circuit
from .snail import SnailParams, compile_1q, snail_operator
from .transpile import CircuitIR, SnailCircuit, compile_circuit, decompose, decompose_2q, reconstruct
from ._validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "BosonicOperator",
    "SbmHamiltonian",
    "sbm_map",
    "FockState",
    "PopulationSeries",
    "propagate_dynamics",
    "run_circuit",
    "SnailParams",
    "compile_1q",
    "snail_operator",
    "CircuitIR",
    "SnailCircuit",
    "compile_circuit",
    "decompose",
    "decompose_2q",
    "reconstruct",
    "ValidationError",
]
