"""Rewrite 1- and 2-qubit unitaries as rotations plus CZ, then as SNAIL records.

Conventions
-----------
* ``Rz(a) = exp(-i a Z / 2)`` and ``Ry(a) = exp(-i a Y / 2)``; a rotation gate
  with angles ``(theta, phi, lam)`` is ``Rz(phi) Ry(theta) Rz(lam)``.
* Qubit 0 is the most significant tensor factor, so basis index
  ``i = 2 * b0 + b1`` for two qubits.
* Gate lists are in time order; :func:`reconstruct` multiplies them
  right-to-left.

Two-qubit unitaries go through the magic-basis (KAK) decomposition
``U = g (A1 (x) A0) exp(i(x XX + y YY + z ZZ)) (B1 (x) B0)``.  The interaction
coordinates select a template with 0, 1, 2 or 3 CZ gates.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._validation import ValidationError, check_unitary
from .numerics import logm_principal
from .snail import CrossKerrGate, SnailParams, UnstableOscillatorWarning, compile_1q

__all__ = [
    "Rotation1Q",
    "CZ",
    "GlobalPhase",
    "CircuitIR",
    "SnailGate",
    "SnailCircuit",
    "rotation_matrix",
    "effective_hamiltonian",
    "euler_angles_1q",
    "kak_decompose",
    "decompose_1q",
    "decompose_2q",
    "decompose",
    "reconstruct",
    "compile_circuit",
    "circuit_fidelity",
    "cz_count",
]

COORD_TOL = 1e-9
_LOCAL_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
_PAULIS = (_X, _Y, _Z)

_MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)
_MAGIC_DAG = _MAGIC.conj().T
# In the magic basis XX, YY and ZZ are diagonal; row j of _COORDS maps
# (w, x, y, z) to the phase of the j-th diagonal entry of
# exp(i w) exp(i(x XX + y YY + z ZZ)).
_COORDS = np.column_stack(
    [np.ones(4)]
    + [np.real(np.diag(_MAGIC_DAG @ np.kron(p, p) @ _MAGIC)) for p in _PAULIS]
)


def _rz(a: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def _ry(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rx(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rotation_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """``Rz(phi) @ Ry(theta) @ Rz(lam)`` (special unitary)."""
    return _rz(phi) @ _ry(theta) @ _rz(lam)


# --------------------------------------------------------------------------
# circuit containers


@dataclass(frozen=True)
class Rotation1Q:
    theta: float
    phi: float
    lam: float
    target: int

    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.theta, self.phi, self.lam)


@dataclass(frozen=True)
class CZ:
    modes: tuple[int, int] = (0, 1)


@dataclass(frozen=True)
class GlobalPhase:
    phase: float


GateIR = Union[Rotation1Q, CZ, GlobalPhase]


@dataclass(frozen=True)
class CircuitIR:
    width: int
    gates: tuple = ()

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError("circuit width must be positive")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if isinstance(g, Rotation1Q) and not 0 <= g.target < self.width:
                raise ValidationError(f"rotation target {g.target} outside width {self.width}")
            if isinstance(g, CZ):
                a, b = g.modes
                if a == b or not (0 <= a < self.width and 0 <= b < self.width):
                    raise ValidationError(f"invalid CZ modes {g.modes} for width {self.width}")

    @property
    def num_cz(self) -> int:
        return sum(isinstance(g, CZ) for g in self.gates)

    @property
    def rotations(self) -> list[Rotation1Q]:
        return [g for g in self.gates if isinstance(g, Rotation1Q)]

    @property
    def global_phase(self) -> float:
        return float(sum(g.phase for g in self.gates if isinstance(g, GlobalPhase)))

    def to_dict(self, units: str = "dimensionless") -> dict:
        gates = []
        for g in self.gates:
            if isinstance(g, Rotation1Q):
                gates.append({"type": "rot", "target": g.target, "theta": g.theta,
                              "phi": g.phi, "lambda": g.lam})
            elif isinstance(g, CZ):
                gates.append({"type": "cz", "targets": list(g.modes)})
            else:
                gates.append({"type": "phase", "phase": g.phase})
        return {"width": self.width, "units": units, "gates": gates}

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitIR":
        gates = []
        for g in d["gates"]:
            kind = g["type"]
            if kind == "rot":
                gates.append(Rotation1Q(float(g["theta"]), float(g["phi"]),
                                        float(g["lambda"]), int(g["target"])))
            elif kind == "cz":
                gates.append(CZ(tuple(int(t) for t in g["targets"])))
            elif kind == "phase":
                gates.append(GlobalPhase(float(g["phase"])))
            else:
                raise ValidationError(f"unknown gate type {kind!r} in abstract circuit")
        return cls(int(d["width"]), tuple(gates))


@dataclass(frozen=True)
class SnailGate:
    params: SnailParams
    target: int


@dataclass(frozen=True)
class SnailCircuit:
    """Compiled circuit.

    ``global_phase`` is only non-zero when the circuit has no SNAIL gate to
    absorb the phase into.
    """

    width: int
    gates: tuple = ()
    global_phase: float = 0.0
    units: str = "dimensionless"

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            modes = (g.target,) if isinstance(g, SnailGate) else g.mode_pair
            if any(not 0 <= m < self.width for m in modes):
                raise ValidationError(f"gate {g} addresses a mode outside width {self.width}")

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            if isinstance(g, SnailGate):
                gates.append({"type": "snail", "target": g.target, **g.params.to_dict()})
            else:
                gates.append({"type": "crosskerr", "targets": list(g.mode_pair), "chi_t": g.chi_t})
        return {"width": self.width, "units": self.units, "global_phase": self.global_phase,
                "gates": gates}

    @classmethod
    def from_dict(cls, d: dict) -> "SnailCircuit":
        gates = []
        for g in d["gates"]:
            if g["type"] == "snail":
                gates.append(SnailGate(SnailParams.from_dict(g), int(g["target"])))
            elif g["type"] == "crosskerr":
                gates.append(CrossKerrGate(tuple(int(t) for t in g["targets"]), float(g["chi_t"])))
            else:
                raise ValidationError(f"unknown gate type {g['type']!r} in SNAIL circuit")
        return cls(int(d["width"]), tuple(gates), float(d.get("global_phase", 0.0)),
                   d.get("units", "dimensionless"))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


# --------------------------------------------------------------------------
# single-qubit pieces


def effective_hamiltonian(u) -> np.ndarray:
    """Hermitian ``H`` with ``expm(-iH) = U``, spectrum in ``(-pi, pi]``."""
    return logm_principal(u)


def euler_angles_1q(u) -> tuple[float, float, float, float]:
    """Return ``(theta, phi, lam, gamma)`` with
    ``U = exp(i gamma) Rz(phi) Ry(theta) Rz(lam)`` and ``theta`` in ``[0, pi]``.

    When ``theta`` is 0 or pi only one of ``phi``, ``lam`` is determined and
    ``phi`` is set to 0.
    """
    u = check_unitary(u, name="1-qubit unitary")
    if u.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 unitary, got {u.shape}")
    v = u / np.sqrt(np.linalg.det(u))
    theta = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-14:
        theta, phi, lam = 0.0, 0.0, 2 * float(np.angle(v[1, 1]))
    elif abs(v[0, 0]) < 1e-14:
        theta, phi, lam = math.pi, 0.0, -2 * float(np.angle(v[1, 0]))
    else:
        total = 2 * float(np.angle(v[1, 1]))
        diff = 2 * float(np.angle(v[1, 0]))
        phi, lam = (total + diff) / 2, (total - diff) / 2
    phi, lam = math.remainder(phi, 4 * math.pi), math.remainder(lam, 4 * math.pi)
    gamma = float(np.angle(np.trace(rotation_matrix(theta, phi, lam).conj().T @ u)))
    return theta, phi, lam, gamma


# --------------------------------------------------------------------------
# two-qubit KAK


def _split_local(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Best ``(a1, a0)`` with ``m ~ kron(a1, a0)``; third value is the residual
    second singular value of the reshuffled matrix (0 for exact products)."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    a1 = math.sqrt(s[0]) * uu[:, 0].reshape(2, 2)
    a0 = math.sqrt(s[0]) * vh[0].reshape(2, 2)
    if s[1] > 1e-6:
        return a1, a0, float(s[1])
    a1 = a1 / np.sqrt(np.linalg.det(a1))
    a0 = a0 / np.sqrt(np.linalg.det(a0))
    # kron(a1, a0) now matches m up to a phase; put it on a1.
    ph = np.trace(np.kron(a1, a0).conj().T @ m) / 4
    a1 = a1 * (ph / abs(ph))
    return a1, a0, float(s[1])


def _real_orthogonal_diagonalizer(m2: np.ndarray) -> np.ndarray:
    re, im = m2.real, m2.imag
    # Re and Im of a symmetric unitary commute; a generic real combination
    # shares their eigenbasis.
    for c in (0.5772156649, 1.6180339887, -2.7182818285, 0.3183098862, 4.6692016091):
        _, o = np.linalg.eigh(re + c * im)
        d = o.T @ m2 @ o
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-10:
            return o
    raise ArithmeticError("failed to diagonalize the magic-basis Gram matrix")


@dataclass(frozen=True)
class KakDecomposition:
    """``U = exp(i phase) (after[0] (x) after[1]) N(x, y, z) (before[0] (x) before[1])``."""

    phase: float
    after: tuple
    coords: tuple
    before: tuple

    def interaction(self) -> np.ndarray:
        x, y, z = self.coords
        d = np.exp(1j * (_COORDS[:, 1:] @ np.array([x, y, z])))
        return _MAGIC @ np.diag(d) @ _MAGIC_DAG

    def matrix(self) -> np.ndarray:
        return (
            np.exp(1j * self.phase)
            * np.kron(*self.after)
            @ self.interaction()
            @ np.kron(*self.before)
        )


def kak_decompose(u) -> KakDecomposition:
    """Magic-basis decomposition with coordinates shifted into ``(-pi/4, pi/4]``."""
    u = check_unitary(u, name="2-qubit unitary")
    if u.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 unitary, got {u.shape}")
    det = np.linalg.det(u)
    phase = float(np.angle(det)) / 4
    v = u * np.exp(-1j * phase)
    up = _MAGIC_DAG @ v @ _MAGIC
    o = _real_orthogonal_diagonalizer(up.T @ up)
    if np.linalg.det(o) < 0:
        o[:, 0] = -o[:, 0]
    thetas = np.angle(np.diag(o.T @ (up.T @ up) @ o)) / 2
    k1 = up @ o @ np.diag(np.exp(-1j * thetas))
    if np.linalg.det(k1).real < 0:
        thetas[0] += math.pi
        k1[:, 0] = -k1[:, 0]
    k1 = k1.real
    w, x, y, z = np.linalg.solve(_COORDS, thetas)
    phase += w
    a1, a0, _ = _split_local(_MAGIC @ k1 @ _MAGIC_DAG)
    b1, b0, _ = _split_local(_MAGIC @ o.T @ _MAGIC_DAG)
    coords = [x, y, z]
    # exp(i(v + k pi/2) PP) = exp(i v PP) (i PP)^k, and PP commutes with N.
    for idx, p in enumerate(_PAULIS):
        k = 0
        while coords[idx] > math.pi / 4 + COORD_TOL:
            coords[idx] -= math.pi / 2
            k += 1
        while coords[idx] <= -math.pi / 4 + COORD_TOL:
            coords[idx] += math.pi / 2
            k -= 1
        if k % 4:
            pk = np.linalg.matrix_power(p, k % 4)
            b1, b0 = pk @ b1, pk @ b0
            phase += (k % 4) * math.pi / 2
    return KakDecomposition(phase, (a1, a0), tuple(float(c) for c in coords), (b1, b0))


def cz_count(coords) -> int:
    """Minimal CZ count for shifted interaction coordinates."""
    vals = [abs(c) for c in coords]
    zeros = sum(v < COORD_TOL for v in vals)
    if zeros == 3:
        return 0
    if zeros == 2 and max(vals) > math.pi / 4 - COORD_TOL:
        return 1
    if zeros >= 1:
        return 2
    return 3


# Templates: lists of ("u", qubit, 2x2) / ("cz",) in time order, each equal to
# N(x, y, z) up to a global phase.

def _c01():
    # CNOT controlled by qubit 0.
    return [("u", 1, _H), ("cz",), ("u", 1, _H)]


def _c10():
    return [("u", 0, _H), ("cz",), ("u", 0, _H)]


def _conjugated(q: np.ndarray, ops: list) -> list:
    qd = q.conj().T
    return [("u", 0, qd), ("u", 1, qd)] + ops + [("u", 0, q), ("u", 1, q)]


# Local changes of frame taking Z -> (+/-) P on both qubits.
_Z_TO = {0: _H, 1: _rx(math.pi / 2), 2: _I2}


def _template(coords) -> list:
    x, y, z = coords
    n = cz_count(coords)
    if n == 0:
        return []
    if n == 1:
        axis = int(np.argmax(np.abs(coords)))
        ops = [("cz",), ("u", 0, _rz(-math.pi / 2)), ("u", 1, _rz(-math.pi / 2))]
        return _conjugated(_Z_TO[axis], ops)
    if n == 2:
        zero = int(np.argmin(np.abs(coords)))
        if zero == 1:
            return _c01() + [("u", 0, _rx(-2 * x)), ("u", 1, _rz(-2 * z))] + _c01()
        if zero == 2:
            # N(x, y, 0) = Q N(x, 0, y) Q^dag with Q = Rx(pi/2) on both qubits;
            # Q Z Q^dag = +/-Y, and the sign cancels in ZZ -> YY.
            q = _rx(math.pi / 2)
            inner = _c01() + [("u", 0, _rx(-2 * x)), ("u", 1, _rz(-2 * y))] + _c01()
            return _conjugated(q, inner)
        q = _rz(math.pi / 2)
        inner = _c01() + [("u", 0, _rx(-2 * y)), ("u", 1, _rz(-2 * z))] + _c01()
        return _conjugated(q, inner)
    return (
        [("u", 1, _rz(math.pi / 2))]
        + _c10()
        + [("u", 0, _rz(math.pi / 2 - 2 * z)), ("u", 1, _ry(math.pi / 2 - 2 * x))]
        + _c01()
        + [("u", 1, _ry(2 * y - math.pi / 2))]
        + _c10()
        + [("u", 0, _rz(-math.pi / 2))]
    )


def _ops_to_gates(ops: list, width: int) -> list:
    """Merge runs of single-qubit matrices and drop ones proportional to I."""
    pending = [_I2.copy() for _ in range(width)]
    gates: list = []

    def flush(q):
        m = pending[q]
        pending[q] = _I2.copy()
        if np.max(np.abs(m - np.trace(m) / 2 * _I2)) < _LOCAL_TOL:
            return
        theta, phi, lam, _ = euler_angles_1q(m)
        gates.append(Rotation1Q(theta, phi, lam, q))

    for op in ops:
        if op[0] == "cz":
            for q in range(width):
                flush(q)
            gates.append(CZ((0, 1)))
        else:
            _, q, m = op
            pending[q] = m @ pending[q]
    for q in range(width):
        flush(q)
    return gates


def _with_phase(gates: list, width: int, target: np.ndarray) -> CircuitIR:
    bare = reconstruct(CircuitIR(width, tuple(gates)))
    phase = float(np.angle(np.trace(bare.conj().T @ target)))
    return CircuitIR(width, tuple(gates) + (GlobalPhase(phase),))


def decompose_1q(u) -> CircuitIR:
    u = check_unitary(u, name="1-qubit unitary")
    gates = _ops_to_gates([("u", 0, u)], 1)
    return _with_phase(gates, 1, u)


def decompose_2q(u) -> CircuitIR:
    """Rotations + at most 3 CZ reproducing ``U`` including its global phase."""
    u = check_unitary(u, name="2-qubit unitary")
    if u.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 unitary, got {u.shape}")
    # Unitaries that are a single CZ dressed on one side only.
    for left in (True, False):
        local = u @ _CZ if left else _CZ @ u
        a1, a0, resid = _split_local(local)
        if resid < _LOCAL_TOL:
            if left:
                ops = [("cz",), ("u", 0, a1), ("u", 1, a0)]
            else:
                ops = [("u", 0, a1), ("u", 1, a0), ("cz",)]
            return _with_phase(_ops_to_gates(ops, 2), 2, u)
    kak = kak_decompose(u)
    ops = (
        [("u", 0, kak.before[0]), ("u", 1, kak.before[1])]
        + _template(kak.coords)
        + [("u", 0, kak.after[0]), ("u", 1, kak.after[1])]
    )
    return _with_phase(_ops_to_gates(ops, 2), 2, u)


def decompose(u) -> CircuitIR:
    """Dispatch on dimension: 2x2 -> one qubit, 4x4 -> two qubits."""
    dim = np.asarray(u).shape[0]
    if dim == 2:
        return decompose_1q(u)
    if dim == 4:
        return decompose_2q(u)
    raise ValidationError(f"only 1- and 2-qubit unitaries are supported, got dimension {dim}")


def _embed_qubit(m: np.ndarray, target: int, width: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for q in range(width):
        out = np.kron(out, m if q == target else _I2)
    return out


def _cz_diag(modes: tuple[int, int], width: int) -> np.ndarray:
    idx = np.arange(2**width)
    a, b = modes
    bit_a = (idx >> (width - 1 - a)) & 1
    bit_b = (idx >> (width - 1 - b)) & 1
    return np.where(bit_a & bit_b, -1.0, 1.0).astype(complex)


def reconstruct(c: CircuitIR) -> np.ndarray:
    """Unitary of a circuit on ``2**width`` dimensions."""
    u = np.eye(2**c.width, dtype=complex)
    for g in c.gates:
        if isinstance(g, Rotation1Q):
            u = _embed_qubit(g.matrix(), g.target, c.width) @ u
        elif isinstance(g, CZ):
            u = _cz_diag(g.modes, c.width)[:, None] * u
        else:
            u = np.exp(1j * g.phase) * u
    return u


def circuit_fidelity(c: CircuitIR, u) -> float:
    """``|tr(V^dag U)| / dim`` for ``V = reconstruct(c)``."""
    v = reconstruct(c)
    return float(abs(np.trace(v.conj().T @ np.asarray(u))) / v.shape[0])


def _stable_hamiltonian(h: np.ndarray) -> np.ndarray:
    """Shift eigenvalues of ``h`` by multiples of 2*pi to make ``omega >= 0``.

    ``expm(-i h)`` is unchanged.  Gives up (returns ``h``) when the shift
    would need more than a few periods.
    """
    omega = (h[1, 1] - h[0, 0]).real
    if omega >= 0:
        return h
    w, v = np.linalg.eigh(h)
    for j in np.argsort(-(np.abs(v[1]) ** 2 - np.abs(v[0]) ** 2)):
        delta = abs(v[1, j]) ** 2 - abs(v[0, j]) ** 2
        if delta <= 1e-6:
            continue
        m = math.floor(-omega / (2 * math.pi * delta)) + 1
        if m > 4:
            continue
        shifted = h + 2 * math.pi * m * np.outer(v[:, j], v[:, j].conj())
        return 0.5 * (shifted + shifted.conj().T)
    return h


def compile_circuit(c: CircuitIR, units: str = "dimensionless") -> SnailCircuit:
    """One SNAIL record per rotation, one cross-Kerr coupler per CZ.

    The circuit's global phase is folded into the offset of the first SNAIL.
    """
    phase = c.global_phase
    gates: list = []
    for g in c.gates:
        if isinstance(g, Rotation1Q):
            h = _stable_hamiltonian(effective_hamiltonian(g.matrix()))
            if phase and not any(isinstance(x, SnailGate) for x in gates):
                h = h - phase * np.eye(2)
                phase = 0.0
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UnstableOscillatorWarning)
                params = compile_1q(h)
            gates.append(SnailGate(params, g.target))
        elif isinstance(g, CZ):
            gates.append(CrossKerrGate(g.modes))
    return SnailCircuit(c.width, tuple(gates), float(phase), units)
