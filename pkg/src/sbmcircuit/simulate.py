"""Run compiled SNAIL circuits on truncated multi-mode Fock spaces."""
from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import CutoffError, ValidationError, check_hermitian
from .numerics import expm_hermitian
from .snail import CrossKerrGate, SnailParams, snail_operator
from .transpile import SnailCircuit, SnailGate, compile_circuit, decompose

__all__ = [
    "SPEED_OF_LIGHT_CM_PER_FS",
    "WAVENUMBER_TO_RAD_PER_FS",
    "DEFAULT_CUTOFF",
    "FockState",
    "PopulationSeries",
    "apply_gate",
    "run_circuit",
    "qubit_populations",
    "site_encoding",
    "propagate_dynamics",
]

SPEED_OF_LIGHT_CM_PER_FS = 2.99792458e-5
# exp(-i t E u) with E in cm^-1 and t in fs.
WAVENUMBER_TO_RAD_PER_FS = 2 * np.pi * SPEED_OF_LIGHT_CM_PER_FS
DEFAULT_CUTOFF = 4
_NORM_TOL = 1e-10


@dataclass(frozen=True)
class FockState:
    modes: int
    cutoff: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.cutoff**self.modes:
            raise ValidationError(
                f"{amps.size} amplitudes do not fit {self.modes} modes of {self.cutoff} levels"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > _NORM_TOL:
            raise ValidationError(f"state norm {norm} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, occupations, cutoff: int) -> "FockState":
        occ = tuple(int(n) for n in occupations)
        if any(not 0 <= n < cutoff for n in occ):
            raise ValidationError(f"occupations {occ} exceed cutoff {cutoff}")
        amps = np.zeros(cutoff ** len(occ), dtype=complex)
        amps[np.ravel_multi_index(occ, (cutoff,) * len(occ))] = 1.0
        return cls(len(occ), cutoff, amps)

    @classmethod
    def from_qubits(cls, vector, cutoff: int = DEFAULT_CUTOFF) -> "FockState":
        """Embed a normalized ``2**modes`` vector into levels {0, 1} of each mode."""
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        modes = int(round(np.log2(vec.size)))
        if 2**modes != vec.size or modes < 1:
            raise ValidationError(f"vector length {vec.size} is not a power of two")
        amps = np.zeros(cutoff**modes, dtype=complex)
        amps[_qubit_indices(modes, cutoff)] = vec
        return cls(modes, cutoff, amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.cutoff,) * self.modes)

    def qubit_amplitudes(self) -> np.ndarray:
        return self.amplitudes[_qubit_indices(self.modes, self.cutoff)]


def _qubit_indices(modes: int, cutoff: int) -> np.ndarray:
    bits = np.array(np.unravel_index(np.arange(2**modes), (2,) * modes))
    return np.ravel_multi_index(tuple(bits), (cutoff,) * modes)


@lru_cache(maxsize=512)
def _snail_unitary(params: SnailParams, cutoff: int) -> np.ndarray:
    u = expm_hermitian(snail_operator(params, cutoff).matrix)
    u.setflags(write=False)
    return u


@lru_cache(maxsize=32)
def _cross_kerr_phases(cutoff: int, chi_t: float) -> np.ndarray:
    n = np.arange(cutoff)
    return np.exp(-1j * chi_t * np.outer(n, n))


def _apply(amps: np.ndarray, gate, modes: int, cutoff: int) -> np.ndarray:
    t = amps.reshape((cutoff,) * modes)
    if isinstance(gate, SnailGate):
        if cutoff < 3:
            raise CutoffError("SNAIL gates need at least 3 levels per mode")
        if not 0 <= gate.target < modes:
            raise ValidationError(f"target mode {gate.target} outside {modes} modes")
        u = _snail_unitary(gate.params, cutoff)
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [gate.target])), 0, gate.target)
    elif isinstance(gate, CrossKerrGate):
        a, b = gate.mode_pair
        if max(a, b) >= modes:
            raise ValidationError(f"cross-Kerr modes {gate.mode_pair} outside {modes} modes")
        shape = [1] * modes
        shape[a] = shape[b] = cutoff
        ph = _cross_kerr_phases(cutoff, gate.chi_t)
        ph = ph if a < b else ph.T
        t = t * ph.reshape(shape)
    else:
        raise ValidationError(f"unsupported gate {gate!r}")
    return t.reshape(-1)


def apply_gate(state: FockState, gate) -> FockState:
    """Evolve ``state`` under one SNAIL or cross-Kerr gate for unit time."""
    return FockState(state.modes, state.cutoff, _apply(state.amplitudes, gate, state.modes, state.cutoff))


def run_circuit(c: SnailCircuit, initial: FockState) -> FockState:
    if c.width != initial.modes:
        raise ValidationError(f"circuit width {c.width} != state modes {initial.modes}")
    amps = initial.amplitudes
    for g in c.gates:
        amps = _apply(amps, g, initial.modes, initial.cutoff)
    if c.global_phase:
        amps = np.exp(1j * c.global_phase) * amps
    return FockState(initial.modes, initial.cutoff, amps)


def site_encoding(n_sites: int) -> list[str]:
    """Site ``i`` (1-based) is the bitstring of ``i - 1``, mode 0 most significant."""
    modes = max(1, int(np.ceil(np.log2(n_sites))))
    return [format(i, f"0{modes}b") for i in range(n_sites)]


def qubit_populations(state: FockState, encoding=None) -> tuple[np.ndarray, float]:
    """Probabilities of the bitstrings in ``encoding`` and the leakage.

    Leakage is everything outside ``{|0>, |1>}`` on every mode.
    """
    encoding = site_encoding(2**state.modes) if encoding is None else list(encoding)
    t = state.tensor()
    probs = np.empty(len(encoding))
    for i, bits in enumerate(encoding):
        if len(bits) != state.modes or set(bits) - {"0", "1"}:
            raise ValidationError(f"bitstring {bits!r} does not match {state.modes} modes")
        probs[i] = abs(t[tuple(int(b) for b in bits)]) ** 2
    qubit_total = float(np.sum(np.abs(state.qubit_amplitudes()) ** 2))
    return probs, max(0.0, 1.0 - qubit_total)


@dataclass(frozen=True)
class PopulationSeries:
    times: np.ndarray
    labels: tuple
    values: np.ndarray
    leakage: np.ndarray

    def column(self, label) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(["t", *self.labels, "leakage"]) + "\n")
        for t, row, leak in zip(self.times, self.values, self.leakage):
            buf.write(",".join(f"{v:.12g}" for v in (t, *row, leak)) + "\n")
        return buf.getvalue()


def _initial_vector(initial, k: int) -> np.ndarray:
    if np.ndim(initial) == 0:
        idx = int(initial)
        if not 0 <= idx < k:
            raise ValidationError(f"initial index {idx} outside dimension {k}")
        v = np.zeros(k, dtype=complex)
        v[idx] = 1.0
        return v
    v = np.asarray(initial, dtype=complex).reshape(-1)
    if v.size != k:
        raise ValidationError(f"initial vector has length {v.size}, expected {k}")
    return v / np.linalg.norm(v)


def propagate_dynamics(
    h,
    tau: float,
    steps: int,
    initial=0,
    mode: str = "direct",
    unit: float = WAVENUMBER_TO_RAD_PER_FS,
    cutoff: int = DEFAULT_CUTOFF,
    labels=None,
) -> PopulationSeries:
    """Repeatedly apply ``U = exp(-i tau unit H)`` and record populations.

    ``mode="direct"`` multiplies by ``U`` on the logical space;
    ``mode="snail"`` transpiles ``U`` once, compiles it to SNAIL gates and
    runs the compiled circuit ``steps`` times on the Fock space.
    """
    h = check_hermitian(h, name="Hamiltonian")
    if tau <= 0 or steps < 1:
        raise ValidationError("tau must be positive and steps >= 1")
    k = h.shape[0]
    labels = tuple(labels) if labels is not None else tuple(f"site{i + 1}" for i in range(k))
    psi = _initial_vector(initial, k)
    u = expm_hermitian(h, tau * unit)
    times = tau * np.arange(steps + 1)
    values = np.empty((steps + 1, k))
    leakage = np.zeros(steps + 1)
    if mode == "direct":
        for n in range(steps + 1):
            values[n] = np.abs(psi) ** 2
            psi = u @ psi
    elif mode == "snail":
        if k not in (2, 4):
            raise ValidationError("SNAIL mode supports 2x2 and 4x4 Hamiltonians only")
        circuit = compile_circuit(decompose(u))
        encoding = site_encoding(k)
        state = FockState.from_qubits(psi, cutoff)
        for n in range(steps + 1):
            values[n], leakage[n] = qubit_populations(state, encoding)
            if n < steps:
                state = run_circuit(circuit, state)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return PopulationSeries(times, labels, values, leakage)
