"""Truncated Fock-space operators and the single-bosonic-mode (SBM) mapping.

States are labelled from 0: the truncated space with ``cutoff = D`` holds
``|0>, ..., |D-1>``.  Multi-mode operators use the Kronecker ordering in
which mode 0 is the most significant index.

A ``k x k`` Hermitian matrix ``H`` is mapped onto one oscillator as

    H_sbm = sum_{n,m} H[n, m] P_nm,
    P_nm  = sqrt(m!/n!) / (k-1)!^2 * (a^dag)^n  Gamma_k^(k-1)  (a^dag)^(k-1-m),
    Gamma_k = ((k-1) - N) a,

whose top ``k x k`` block equals ``H`` and which never couples the first
``k`` levels to the rest.  Products inside ``P_nm`` reach level ``2k-2``, so
the cutoff must be at least ``2k-1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, sqrt

import numpy as np

from ._validation import CutoffError, ValidationError, check_hermitian

__all__ = [
    "BosonicOperator",
    "SbmHamiltonian",
    "annihilation",
    "creation",
    "number",
    "gamma_k",
    "transition_op",
    "sbm_map",
    "dyson_maleev",
    "embed",
    "min_cutoff",
    "default_cutoff",
    "block_residuals",
]


@dataclass(frozen=True)
class BosonicOperator:
    """Dense matrix on ``modes`` oscillators truncated at ``cutoff`` levels each."""

    modes: int
    cutoff: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.modes < 1 or self.cutoff < 1:
            raise ValidationError("modes and cutoff must be positive")
        m = np.array(self.matrix, dtype=complex)
        dim = self.cutoff**self.modes
        if m.shape != (dim, dim):
            raise ValidationError(
                f"matrix shape {m.shape} does not match cutoff**modes = {dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "BosonicOperator":
        return BosonicOperator(self.modes, self.cutoff, self.matrix.conj().T)

    def __matmul__(self, other: "BosonicOperator") -> "BosonicOperator":
        if (self.modes, self.cutoff) != (other.modes, other.cutoff):
            raise ValidationError("operators live on different Fock spaces")
        return BosonicOperator(self.modes, self.cutoff, self.matrix @ other.matrix)

    def to_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "modes": self.modes,
            "cutoff": self.cutoff,
            "matrix": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BosonicOperator":
        modes, cutoff = int(d["modes"]), int(d["cutoff"])
        pairs = np.asarray(d["matrix"], dtype=float)
        dim = cutoff**modes
        if pairs.shape != (dim * dim, 2):
            raise ValidationError(f"expected {dim * dim} [re, im] pairs, got shape {pairs.shape}")
        return cls(modes, cutoff, (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "BosonicOperator":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SbmHamiltonian:
    """Result of :func:`sbm_map`: the source matrix and its oscillator image."""

    k: int
    source: np.ndarray
    operator: BosonicOperator

    @property
    def top_block(self) -> np.ndarray:
        return self.operator.matrix[: self.k, : self.k]

    def residuals(self) -> tuple[float, float]:
        """(top-block residual, largest physical/unphysical coupling)."""
        return block_residuals(self.operator.matrix, self.source)


def min_cutoff(k: int) -> int:
    return 2 * k - 1


def default_cutoff(k: int) -> int:
    return 2 * k


def _check_cutoff(cutoff: int, needed: int, what: str) -> int:
    cutoff = int(cutoff)
    if cutoff < needed:
        raise CutoffError(f"{what} needs cutoff >= {needed}, got {cutoff}")
    return cutoff


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)


def annihilation(cutoff: int) -> BosonicOperator:
    """``a`` with ``a|m> = sqrt(m)|m-1>``."""
    cutoff = _check_cutoff(cutoff, 2, "annihilation")
    return BosonicOperator(1, cutoff, _ladder(cutoff))


def creation(cutoff: int) -> BosonicOperator:
    return annihilation(cutoff).adjoint()


def number(cutoff: int) -> BosonicOperator:
    cutoff = _check_cutoff(cutoff, 1, "number")
    return BosonicOperator(1, cutoff, np.diag(np.arange(cutoff, dtype=float)))


def gamma_k(k: int, cutoff: int) -> BosonicOperator:
    """``Gamma_k = ((k-1) - N) a`` on the truncated space."""
    if k < 2:
        raise ValidationError(f"logical dimension must be >= 2, got {k}")
    cutoff = _check_cutoff(cutoff, min_cutoff(k), f"Gamma_{k}")
    a = _ladder(cutoff)
    n = np.diag(np.arange(cutoff, dtype=float))
    return BosonicOperator(1, cutoff, ((k - 1) * np.eye(cutoff) - n) @ a)


def transition_op(n: int, m: int, k: int, cutoff: int) -> BosonicOperator:
    """Oscillator polynomial acting as ``|n><m|`` on the first ``k`` levels."""
    if k < 2:
        raise ValidationError(f"logical dimension must be >= 2, got {k}")
    if not (0 <= n < k and 0 <= m < k):
        raise ValidationError(f"indices ({n}, {m}) out of range for k = {k}")
    cutoff = _check_cutoff(cutoff, min_cutoff(k), f"P_nm for k={k}")
    # Each column |l> follows a single path: up k-1-m levels, down k-1 with
    # Gamma_k, up n.  Multiplying the ladder factors along that path gives a
    # rational prefactor times one square root, which is exactly 1 on the
    # logical block (the matrix product would carry roundoff).
    mat = np.zeros((cutoff, cutoff), dtype=complex)
    for l in range(m, cutoff):
        top = l + k - 1 - m
        j = l - m + n
        if top >= cutoff or j >= cutoff:
            continue
        gamma = 1
        for q in range(top - k + 2, top + 1):
            gamma *= k - q
        if gamma == 0:
            continue
        rational = Fraction(gamma * factorial(top), factorial(k - 1) ** 2 * factorial(l - m))
        root = Fraction(factorial(m) * factorial(j), factorial(n) * factorial(l))
        mat[j, l] = float(rational) * (1.0 if root == 1 else sqrt(root))
    return BosonicOperator(1, cutoff, mat)


def sbm_map(h, cutoff: int | None = None) -> SbmHamiltonian:
    """Map a ``k x k`` Hermitian matrix onto a single truncated oscillator.

    Parameters
    ----------
    h : array_like
        Hermitian matrix (checked to 1e-10).
    cutoff : int, optional
        Fock levels kept; defaults to ``2k``.  Must be at least ``2k-1``.
    """
    src = check_hermitian(h, name="Hamiltonian")
    k = src.shape[0]
    if k < 2:
        raise ValidationError("SBM mapping needs k >= 2")
    cutoff = default_cutoff(k) if cutoff is None else cutoff
    cutoff = _check_cutoff(cutoff, min_cutoff(k), f"SBM mapping of a {k}x{k} matrix")
    mat = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(k):
        for m in range(k):
            if src[n, m] != 0:
                mat += src[n, m] * transition_op(n, m, k, cutoff).matrix
    return SbmHamiltonian(k, src.copy(), BosonicOperator(1, cutoff, mat))


def block_residuals(mat: np.ndarray, source: np.ndarray) -> tuple[float, float]:
    k = source.shape[0]
    top = float(np.max(np.abs(mat[:k, :k] - source)))
    if mat.shape[0] == k:
        return top, 0.0
    off = max(float(np.max(np.abs(mat[:k, k:]))), float(np.max(np.abs(mat[k:, :k]))))
    return top, off


def dyson_maleev(k: int, cutoff: int) -> tuple[BosonicOperator, BosonicOperator, BosonicOperator]:
    """Dyson-Maleev spin operators ``(S+, S-, Sz)`` for spin ``s = (k-1)/2``.

    ``S+ = a^dag (2s - N)``, ``S- = a``, ``Sz = N - s``.  Only used to check
    that ``Gamma_k`` is the adjoint of ``S+``.
    """
    cutoff = _check_cutoff(cutoff, 2, "Dyson-Maleev operators")
    s = (k - 1) / 2
    a = _ladder(cutoff)
    n = np.diag(np.arange(cutoff, dtype=float))
    eye = np.eye(cutoff)
    return (
        BosonicOperator(1, cutoff, a.conj().T @ (2 * s * eye - n)),
        BosonicOperator(1, cutoff, a),
        BosonicOperator(1, cutoff, n - s * eye),
    )


def embed(single: np.ndarray, mode: int, modes: int) -> np.ndarray:
    """Place a single-mode matrix on ``mode`` of a ``modes``-mode register."""
    single = np.asarray(single)
    d = single.shape[0]
    if not 0 <= mode < modes:
        raise ValidationError(f"mode {mode} out of range for {modes} modes")
    out = np.eye(1, dtype=complex)
    for j in range(modes):
        out = np.kron(out, single if j == mode else np.eye(d))
    return out
