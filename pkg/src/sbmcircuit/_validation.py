"""Input checks shared by every module.

All checks raise subclasses of :class:`ValueError` so callers can catch a
single family of exceptions.
"""
from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class NotSquareError(ValidationError):
    pass


class NotHermitianError(ValidationError):
    pass


class NotUnitaryError(ValidationError):
    pass


class CutoffError(ValidationError):
    pass


def as_square(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a complex 2-D square array or raise."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquareError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_hermitian(m, tol: float = 1e-10, name: str = "matrix") -> np.ndarray:
    a = as_square(m, name)
    res = hermiticity_residual(a)
    if res > tol:
        raise NotHermitianError(f"{name} is not Hermitian (max |M - M^dag| = {res:.3e} > {tol:g})")
    return a


def check_unitary(u, tol: float = 1e-8, name: str = "matrix") -> np.ndarray:
    a = as_square(u, name)
    res = unitarity_residual(a)
    if res > tol:
        raise NotUnitaryError(f"{name} is not unitary (max |U^dag U - I| = {res:.3e} > {tol:g})")
    return a
