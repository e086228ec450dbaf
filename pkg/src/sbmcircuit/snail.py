"""Compile 2x2 Hermitian matrices into driven-SNAIL parameters and back.

For ``k = 2`` the SBM image of ``H`` (0-based entries) can be rewritten with
``H[0, 1] = R exp(i phi)`` and ``b = exp(i phi) a`` as

    H[0,0] + w b^dag b + 2R (b + b^dag) + g3 (b + b^dag)^3 - g3 (b^dag^3 + b^3)

with ``w = H[1,1] - H[0,0]`` and ``g3 = -R/3``: a linearly driven SNAIL with
its quartic term switched off.  The cubic pump term enters with ``-g3``;
with ``+g3`` the operator would couple ``|0>`` to ``|3>``.  Energies are in
whatever unit the caller uses; every gate evolves for unit time.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import CutoffError, ValidationError, check_hermitian
from .fock import BosonicOperator

__all__ = [
    "SnailParams",
    "CrossKerrGate",
    "UnstableOscillatorWarning",
    "compile_1q",
    "snail_operator",
    "rz_params",
    "rx_params",
    "rz_matrix",
    "rx_matrix",
    "cross_kerr_cz",
]


class UnstableOscillatorWarning(UserWarning):
    """Raised (as a warning) for parameters with a negative oscillator frequency."""


def _wrap_phase(phi: float) -> float:
    # Map into (-pi, pi].
    phi = math.remainder(phi, 2 * math.pi)
    return math.pi if phi <= -math.pi else phi


@dataclass(frozen=True)
class SnailParams:
    """Hardware record for one driven SNAIL.

    ``drive`` is the full coefficient ``2R`` of ``(b + b^dag)``; ``g3`` is
    therefore ``-drive/6``.  ``g4`` is always zero.
    """

    offset: float
    omega: float
    drive: float
    g3: float
    phase: float = 0.0
    g4: float = 0.0

    def __post_init__(self):
        if self.drive < 0:
            raise ValidationError("drive amplitude must be non-negative")
        if abs(self.g3 + self.drive / 6) > 1e-12 * max(1.0, abs(self.drive)):
            raise ValidationError(f"g3 = {self.g3} inconsistent with drive = {self.drive}")
        if self.g4 != 0.0:
            raise ValidationError("quartic SNAIL term is not supported (g4 must be 0)")
        if not -math.pi < self.phase <= math.pi:
            raise ValidationError(f"phase {self.phase} outside (-pi, pi]")

    @property
    def r12(self) -> float:
        return self.drive / 2

    @property
    def unstable(self) -> bool:
        """True when the oscillator frequency is negative."""
        return self.omega < 0

    def logical_matrix(self) -> np.ndarray:
        """The 2x2 Hermitian matrix these parameters realize."""
        h01 = self.r12 * np.exp(1j * self.phase)
        return np.array(
            [[self.offset, h01], [np.conj(h01), self.offset + self.omega]], dtype=complex
        )

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SnailParams":
        return cls(**{k: float(d[k]) for k in ("offset", "omega", "drive", "g3", "phase")},
                   g4=float(d.get("g4", 0.0)))


@dataclass(frozen=True)
class CrossKerrGate:
    """``exp(-i chi t  N1 N2)`` on two modes; ``chi t = pi`` gives CZ."""

    mode_pair: tuple[int, int]
    chi_t: float = math.pi

    def __post_init__(self):
        if self.chi_t != math.pi:
            raise ValidationError("cross-Kerr gates are always run for chi*t = pi")
        a, b = self.mode_pair
        if a == b:
            raise ValidationError("cross-Kerr gate needs two distinct modes")
        object.__setattr__(self, "mode_pair", (int(a), int(b)))


def compile_1q(h) -> SnailParams:
    """SNAIL parameters whose Hamiltonian has ``h`` as its qubit block."""
    h = check_hermitian(h, name="1-qubit Hamiltonian")
    if h.shape != (2, 2):
        raise ValidationError(f"compile_1q needs a 2x2 matrix, got {h.shape}")
    h01 = complex(h[0, 1])
    r12 = abs(h01)
    phase = _wrap_phase(float(np.angle(h01))) if r12 > 0 else 0.0
    drive = 2 * r12
    params = SnailParams(
        offset=float(h[0, 0].real),
        omega=float((h[1, 1] - h[0, 0]).real),
        drive=drive,
        g3=-drive / 6,
        phase=phase,
    )
    if params.unstable:
        warnings.warn(
            f"SNAIL frequency {params.omega:.6g} is negative", UnstableOscillatorWarning, stacklevel=2
        )
    return params


def _quadrature_terms(cutoff: int, phase: float):
    # Build on a space 3 levels larger, then project: the cubic terms reach
    # three levels beyond any retained state, so the projection is exact.
    big = cutoff + 3
    a = np.diag(np.sqrt(np.arange(1, big, dtype=float)), 1).astype(complex)
    b = np.exp(1j * phase) * a
    bd = b.conj().T
    x = b + bd
    n = bd @ b
    cube = x @ x @ x
    b3 = b @ b @ b
    sl = slice(0, cutoff)
    return n[sl, sl], x[sl, sl], cube[sl, sl], (b3 + b3.conj().T)[sl, sl]


def snail_operator(p: SnailParams, cutoff: int) -> BosonicOperator:
    """Fock-space Hamiltonian of the driven SNAIL described by ``p``.

    The matrix is the exact projection of the untruncated operator onto the
    first ``cutoff`` levels, so its top 2x2 block is the compiled matrix and
    levels {0, 1} never couple to higher levels.
    """
    cutoff = int(cutoff)
    if cutoff < 3:
        raise CutoffError(f"SNAIL operator needs cutoff >= 3, got {cutoff}")
    n, x, cube, b3 = _quadrature_terms(cutoff, p.phase)
    mat = (
        p.offset * np.eye(cutoff)
        + p.omega * n
        + p.drive * x
        + p.g3 * cube
        - p.g3 * b3
    )
    return BosonicOperator(1, cutoff, 0.5 * (mat + mat.conj().T))


def rz_matrix(lam: float) -> np.ndarray:
    """``diag(1, exp(i lam))``."""
    return np.diag([1.0, np.exp(1j * lam)])


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def rz_params(lam: float) -> SnailParams:
    """SNAIL realizing ``diag(1, exp(i lam))`` with a non-negative frequency.

    The angle is shifted by a multiple of 2*pi into ``(-2 pi, 0]``, where
    ``diag(0, -lam)`` has ``omega = -lam >= 0``.
    """
    lam = float(lam)
    lam_n = lam - 2 * math.pi * math.ceil(lam / (2 * math.pi))
    if lam_n <= -2 * math.pi:
        lam_n += 2 * math.pi
    if lam_n == 0.0:
        lam_n = 0.0  # drop a possible -0.0
    return compile_1q(np.diag([0.0, -lam_n]))


def rx_params(theta: float) -> SnailParams:
    """SNAIL realizing the x rotation by ``theta`` (requires ``omega = 0``)."""
    half = float(theta) / 2
    return compile_1q(np.array([[0.0, half], [half, 0.0]]))


def cross_kerr_cz(cutoff: int, chi_t: float = math.pi) -> BosonicOperator:
    """Diagonal two-mode unitary ``exp(-i chi_t N (x) N)``."""
    cutoff = int(cutoff)
    if cutoff < 2:
        raise CutoffError(f"cross-Kerr gate needs cutoff >= 2, got {cutoff}")
    n = np.arange(cutoff)
    phases = np.exp(-1j * chi_t * np.outer(n, n).reshape(-1))
    return BosonicOperator(2, cutoff, np.diag(phases))
