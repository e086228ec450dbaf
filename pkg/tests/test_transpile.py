import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_unitary, random_hermitian
from sbmcircuit._validation import NotUnitaryError, ValidationError
from sbmcircuit.models import fmo_hamiltonian
from sbmcircuit.numerics import expm_hermitian
from sbmcircuit.simulate import WAVENUMBER_TO_RAD_PER_FS
from sbmcircuit.snail import rz_matrix
from sbmcircuit.transpile import (
    CZ,
    CircuitIR,
    GlobalPhase,
    Rotation1Q,
    SnailCircuit,
    circuit_fidelity,
    compile_circuit,
    cz_count,
    decompose,
    decompose_1q,
    decompose_2q,
    effective_hamiltonian,
    euler_angles_1q,
    kak_decompose,
    reconstruct,
    rotation_matrix,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
CZM = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]])


def interaction(x, y, z):
    return expm_hermitian(-(x * np.kron(X, X) + y * np.kron(Y, Y) + z * np.kron(Z, Z)))


def assert_exact(c, u, tol=1e-9):
    assert np.max(np.abs(reconstruct(c) - u)) < tol


def test_rotation_matrix_is_special_unitary():
    r = rotation_matrix(0.3, -1.2, 2.1)
    assert np.allclose(r.conj().T @ r, I2)
    assert np.isclose(np.linalg.det(r), 1)


def test_euler_pauli_x():
    theta, phi, lam, gamma = euler_angles_1q(X)
    assert theta == pytest.approx(math.pi)
    assert np.allclose(np.exp(1j * gamma) * rotation_matrix(theta, phi, lam), X, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_euler_reconstruction(seed):
    u = haar_unitary(np.random.default_rng(seed), 2)
    theta, phi, lam, gamma = euler_angles_1q(u)
    assert 0 <= theta <= math.pi
    assert np.allclose(np.exp(1j * gamma) * rotation_matrix(theta, phi, lam), u, atol=1e-12)


def test_effective_hamiltonian_cz():
    assert np.allclose(effective_hamiltonian(CZM), np.diag([0, 0, 0, math.pi]), atol=1e-14)


def test_decompose_cz_is_one_cz():
    c = decompose_2q(CZM)
    assert c.num_cz == 1 and not c.rotations
    assert_exact(c, CZM, 1e-15)


def test_decompose_identity_is_empty():
    c = decompose_2q(np.eye(4))
    assert c.num_cz == 0 and not c.rotations
    assert abs(c.global_phase) < 1e-15


@pytest.mark.parametrize(
    "u, expected",
    [
        (np.kron(H, rz_matrix(0.4)), 0),
        (CNOT, 1),
        (interaction(math.pi / 4, 0, 0), 1),
        (interaction(0, math.pi / 4, 0), 1),
        (ISWAP, 2),
        (interaction(0.3, 0.2, 0.0), 2),
        (interaction(0.0, 0.2, -0.5), 2),
        (interaction(0.1, 0.0, 0.3), 2),
        (SWAP, 3),
        (interaction(0.3, 0.2, 0.1), 3),
    ],
)
def test_cz_counts(u, expected):
    c = decompose_2q(u)
    assert c.num_cz == expected
    assert_exact(c, u, 1e-12)


def test_cz_count_rules():
    assert cz_count((0, 0, 0)) == 0
    assert cz_count((math.pi / 4, 0, 0)) == 1
    assert cz_count((0.2, 0, 0)) == 2
    assert cz_count((0.2, 0.1, 0.05)) == 3


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_haar_random_reconstruction(seed):
    u = haar_unitary(np.random.default_rng(seed), 4)
    c = decompose_2q(u)
    assert c.num_cz <= 3
    assert circuit_fidelity(c, u) >= 1 - 1e-9
    assert_exact(c, u)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), zero=st.integers(0, 2), eps=st.sampled_from([0.0, 1e-13, 1e-8, 1e-5]))
def test_degenerate_coordinates(seed, zero, eps):
    # Locally dressed interactions near the 2-CZ and 0-CZ faces.
    rng = np.random.default_rng(seed)
    coords = rng.uniform(-0.7, 0.7, 3)
    coords[zero] = eps
    locs = [haar_unitary(rng, 2) for _ in range(4)]
    u = np.kron(locs[0], locs[1]) @ interaction(*coords) @ np.kron(locs[2], locs[3])
    assert_exact(decompose_2q(u), u)


def test_kak_coordinates_in_range(rng):
    for _ in range(50):
        k = kak_decompose(haar_unitary(rng, 4))
        assert all(-math.pi / 4 < c <= math.pi / 4 + 1e-9 for c in k.coords)
        for a in k.after + k.before:
            assert np.allclose(a.conj().T @ a, I2, atol=1e-10)


def test_decompose_1q(rng):
    u = haar_unitary(rng, 2)
    c = decompose_1q(u)
    assert c.num_cz == 0 and len(c.rotations) == 1
    assert_exact(c, u, 1e-12)


def test_decompose_dispatch():
    assert decompose(X).width == 1
    assert decompose(CZM).width == 2
    with pytest.raises(ValidationError):
        decompose(np.eye(8))
    with pytest.raises(NotUnitaryError):
        decompose_2q(2 * np.eye(4))


def test_fmo_propagator_transpiles():
    u = expm_hermitian(fmo_hamiltonian(), 5 * WAVENUMBER_TO_RAD_PER_FS)
    c = decompose_2q(u)
    assert circuit_fidelity(c, u) >= 1 - 1e-9
    assert c.num_cz <= 3


def test_circuit_ir_json_round_trip(rng):
    c = decompose_2q(haar_unitary(rng, 4))
    back = CircuitIR.from_dict(json.loads(json.dumps(c.to_dict())))
    assert back == c


def test_circuit_ir_validation():
    with pytest.raises(ValidationError):
        CircuitIR(2, (Rotation1Q(0, 0, 0, 2),))
    with pytest.raises(ValidationError):
        CircuitIR(2, (CZ((1, 1)),))
    with pytest.raises(ValidationError):
        CircuitIR.from_dict({"width": 1, "gates": [{"type": "swap"}]})


def test_compile_one_snail_per_rotation(rng):
    c = decompose_2q(haar_unitary(rng, 4))
    s = compile_circuit(c)
    assert len(s.gates) == len(c.rotations) + c.num_cz
    assert sum(g.__class__.__name__ == "CrossKerrGate" for g in s.gates) == c.num_cz


def test_compile_nonnegative_frequencies(rng):
    for _ in range(30):
        s = compile_circuit(decompose_2q(haar_unitary(rng, 4)))
        for g in s.gates:
            if hasattr(g, "params"):
                assert g.params.omega >= -1e-12


def test_compile_phase_without_snail():
    c = CircuitIR(2, (CZ(), GlobalPhase(0.25)))
    s = compile_circuit(c)
    assert s.global_phase == 0.25


def test_snail_circuit_json_round_trip(rng):
    s = compile_circuit(decompose_2q(haar_unitary(rng, 4)))
    assert SnailCircuit.from_dict(json.loads(s.to_json())) == s


def test_snail_circuit_rejects_unknown_gate():
    with pytest.raises(ValidationError):
        SnailCircuit.from_dict({"width": 1, "gates": [{"type": "rot"}]})


def test_hermitian_round_trip_through_unitary(rng):
    h = random_hermitian(rng, 2, scale=0.5)
    u = expm_hermitian(h)
    assert_exact(decompose_1q(u), u, 1e-12)
