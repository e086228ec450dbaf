"""Dense complex matrix functions.

Everything here works on plain ``numpy`` arrays.  Hermitian and normal inputs
go through an eigendecomposition so that results stay exactly Hermitian or
unitary up to roundoff; other inputs fall back to scaling and squaring.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import (
    NotHermitianError,
    ValidationError,
    as_square,
    check_unitary,
    hermiticity_residual,
)

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8
PSD_CLAMP = 1e-10
_NORMAL_TOL = 1e-10
_BRANCH_TOL = 1e-12


class EigenSolverError(ArithmeticError):
    """The eigensolver did not converge or the input is not normal."""


@dataclass(frozen=True)
class EigenDecomposition:
    """``matrix = eigenvectors @ diag(eigenvalues) @ eigenvectors^dag``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_column_phases(v: np.ndarray) -> np.ndarray:
    # Make the largest-magnitude entry of every column real and positive.
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)


def eig_normal(m, is_hermitian: bool = False, normal_tol: float = _NORMAL_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian or normal matrix with unitary eigenvectors.

    Eigenvalues are sorted ascending by real part, ties broken by imaginary
    part.  Each eigenvector's largest component is made real positive so the
    output does not depend on LAPACK phase choices.
    """
    a = as_square(m)
    scale = max(1.0, float(np.max(np.abs(a))))
    try:
        if is_hermitian:
            res = hermiticity_residual(a)
            if res > HERMITIAN_TOL * scale:
                raise NotHermitianError(f"matrix flagged Hermitian has |M - M^dag| = {res:.3e}")
            w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
            w = w.astype(complex)
        else:
            t, v = scipy.linalg.schur(a, output="complex")
            off = np.max(np.abs(np.triu(t, 1))) if a.shape[0] > 1 else 0.0
            if off > normal_tol * scale:
                raise EigenSolverError(f"matrix is not normal (Schur off-diagonal {off:.3e})")
            w = np.diag(t).copy()
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = _fix_column_phases(v[:, order])
    if is_hermitian:
        w = w.real.astype(complex)
    return EigenDecomposition(w, v)


def _anti_hermitian(a: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a + a.conj().T))) <= HERMITIAN_TOL * scale


def expm(m) -> np.ndarray:
    """Matrix exponential.

    Anti-Hermitian input ``M = -iH`` is exponentiated through the spectrum of
    ``H`` so the result is unitary to machine precision.
    """
    a = as_square(m)
    if _anti_hermitian(a):
        dec = eig_normal(1j * a, is_hermitian=True)
        v = dec.eigenvectors
        return (v * np.exp(-1j * dec.eigenvalues.real)) @ v.conj().T
    return scipy.linalg.expm(a)


def expm_hermitian(h, t: float = 1.0) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H``."""
    return expm(-1j * t * as_square(h))


def logm_principal(u) -> np.ndarray:
    """Hermitian ``H`` with ``expm(-iH) = U`` and spectrum in ``(-pi, pi]``.

    An eigenvalue of ``U`` at ``-1`` is assigned the energy ``+pi``.
    """
    a = check_unitary(u, UNITARY_TOL)
    dec = eig_normal(a, normal_tol=10 * UNITARY_TOL)
    energies = -np.angle(dec.eigenvalues)
    energies[energies <= -np.pi + _BRANCH_TOL] = np.pi
    v = dec.eigenvectors
    h = (v * energies) @ v.conj().T
    return 0.5 * (h + h.conj().T)


def sqrtm_psd(m) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more
    negative means the input was not PSD and raises.
    """
    a = as_square(m)
    dec = eig_normal(a, is_hermitian=True)
    w = dec.eigenvalues.real
    if w[0] < -PSD_CLAMP:
        raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    v = dec.eigenvectors
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)
