import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_unitary, random_hermitian
from sbmcircuit._validation import NotHermitianError, NotSquareError, NotUnitaryError, ValidationError
from sbmcircuit.numerics import (
    EigenSolverError,
    eig_normal,
    expm,
    expm_hermitian,
    logm_principal,
    sqrtm_psd,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_eig_normal_hermitian_sorted_and_unitary(rng):
    h = random_hermitian(rng, 5)
    dec = eig_normal(h, is_hermitian=True)
    assert np.all(np.diff(dec.eigenvalues.real) >= 0)
    assert np.allclose(dec.eigenvectors.conj().T @ dec.eigenvectors, np.eye(5), atol=1e-12)
    assert np.allclose(dec.reconstruct(), h, atol=1e-12)
    assert np.allclose(dec.eigenvalues.real, np.linalg.eigvalsh(h), atol=1e-12)


def test_eig_normal_unitary_input(rng):
    u = haar_unitary(rng, 4)
    dec = eig_normal(u)
    assert np.allclose(np.abs(dec.eigenvalues), 1, atol=1e-12)
    assert np.allclose(dec.reconstruct(), u, atol=1e-12)


def test_eig_normal_phase_convention(rng):
    dec = eig_normal(random_hermitian(rng, 4), is_hermitian=True)
    v = dec.eigenvectors
    piv = v[np.argmax(np.abs(v), axis=0), np.arange(4)]
    assert np.allclose(piv.imag, 0, atol=1e-15)
    assert np.all(piv.real > 0)


def test_eig_normal_rejects_non_normal():
    with pytest.raises(EigenSolverError):
        eig_normal(np.array([[1.0, 1.0], [0.0, 2.0]]))


def test_eig_normal_rejects_non_hermitian_flag():
    with pytest.raises(NotHermitianError):
        eig_normal(np.array([[0, 1], [0, 0]]), is_hermitian=True)


def test_non_square_rejected():
    with pytest.raises(NotSquareError):
        expm(np.zeros((2, 3)))


def test_expm_pauli_closed_form():
    t = 0.37
    expected = np.cos(t) * np.eye(2) - 1j * np.sin(t) * X
    assert np.allclose(expm_hermitian(X, t), expected, atol=1e-15)


def test_expm_general_matches_scipy(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(expm(m), scipy.linalg.expm(m), atol=1e-12)


def test_expm_zero_is_identity():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))


@settings(max_examples=60, deadline=None)
@given(seed=seeds, k=st.integers(2, 6))
def test_expm_hermitian_is_unitary(seed, k):
    rng = np.random.default_rng(seed)
    u = expm_hermitian(random_hermitian(rng, k, scale=10.0))
    assert np.max(np.abs(u.conj().T @ u - np.eye(k))) < 1e-12


def test_logm_cz_convention():
    assert np.allclose(logm_principal(CZ), np.diag([0, 0, 0, np.pi]), atol=1e-14)


def test_logm_branch_minus_one():
    assert np.allclose(logm_principal(np.diag([1, -1])), np.diag([0, np.pi]), atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, k=st.integers(2, 6))
def test_logm_round_trip(seed, k):
    rng = np.random.default_rng(seed)
    u = haar_unitary(rng, k)
    h = logm_principal(u)
    assert np.max(np.abs(h - h.conj().T)) < 1e-14
    w = np.linalg.eigvalsh(h)
    assert np.all(w > -np.pi) and np.all(w <= np.pi + 1e-12)
    assert np.max(np.abs(expm_hermitian(h) - u)) < 1e-10


def test_logm_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        logm_principal(np.diag([1.0, 2.0]))


def test_sqrtm_psd_idempotent():
    p = np.full((2, 2), 0.5)
    assert np.allclose(sqrtm_psd(p), p, atol=1e-15)


def test_sqrtm_psd_squares_back(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = a @ a.conj().T
    s = sqrtm_psd(m)
    assert np.allclose(s @ s, m, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(s) >= -1e-12)


def test_sqrtm_psd_clamps_roundoff():
    s = sqrtm_psd(np.diag([1.0, -1e-12]))
    assert np.allclose(s, np.diag([1.0, 0.0]))


def test_sqrtm_psd_rejects_negative():
    with pytest.raises(ValidationError):
        sqrtm_psd(np.diag([1.0, -1e-6]))
