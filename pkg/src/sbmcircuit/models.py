"""Benchmark systems and the open-system (dilation) pipeline.

* two-level donor/acceptor and the 4-site FMO exciton matrix (cm^-1);
* a spin-boson model with an Ohmic bath, solved exactly on a small bath by
  diagonalizing the full vibronic Hamiltonian (dimensionless, hbar = 1);
* the 2x2 population-only propagator extracted from it, and its unitary
  dilation to a 4x4 two-qubit gate.
"""
from __future__ import annotations

import io
import itertools
import json
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.integrate import quad

from ._validation import ValidationError
from .simulate import DEFAULT_CUTOFF, FockState, PopulationSeries, run_circuit
from .transpile import compile_circuit, decompose_2q

__all__ = [
    "tls_hamiltonian",
    "tls_rabi",
    "frenkel_hamiltonian",
    "fmo_hamiltonian",
    "SpinBosonSpec",
    "DEFAULT_SPIN_BOSON",
    "DESK_MODES",
    "DESK_CUTOFF",
    "DESK_TIMES",
    "desk_spec",
    "DiscretizedBath",
    "discretize_ohmic",
    "continuum_reorganization",
    "spin_boson_hamiltonian",
    "thermal_ensemble",
    "reference_propagate",
    "SuperoperatorSeries",
    "population_superoperator",
    "DilatedUnitary",
    "dilate",
    "dilated_step",
    "snail_dilated_step",
]

MAX_DIMENSION = 10_000
ENSEMBLE_TOL = 1e-6


def tls_hamiltonian(epsilon: float, delta: float) -> np.ndarray:
    """``[[-eps, delta], [delta, eps]]``."""
    return np.array([[-epsilon, delta], [delta, epsilon]], dtype=float)


def tls_rabi(epsilon: float, delta: float, times, unit: float = 1.0) -> np.ndarray:
    """Closed-form ``(P0, P1)`` for the two-level system started in state 0.

    ``P1(t) = (delta/W)^2 sin^2(W unit t)`` with ``W = sqrt(eps^2 + delta^2)``.
    """
    t = np.asarray(times, dtype=float)
    w = float(np.hypot(epsilon, delta))
    p1 = np.zeros_like(t) if w == 0 else (delta / w) ** 2 * np.sin(w * unit * t) ** 2
    return np.column_stack([1.0 - p1, p1])


def frenkel_hamiltonian(site_energies, couplings) -> np.ndarray:
    """Single-excitation Frenkel matrix.

    ``couplings`` maps 1-based site pairs ``(j, k)`` to ``J_jk``; the matrix is
    symmetrized.
    """
    e = np.asarray(site_energies, dtype=float)
    h = np.diag(e)
    for (j, k), val in couplings.items():
        if j == k or not (1 <= j <= e.size and 1 <= k <= e.size):
            raise ValidationError(f"bad site pair {(j, k)}")
        h[j - 1, k - 1] = h[k - 1, j - 1] = val
    return h


def fmo_hamiltonian() -> np.ndarray:
    """Sites 1-4 of the FMO complex, cm^-1."""
    return frenkel_hamiltonian(
        [310.0, 230.0, 0.0, 180.0],
        {(1, 2): -97.9, (1, 3): 5.5, (1, 4): -5.8, (2, 3): 30.1, (2, 4): 7.3, (3, 4): -58.8},
    )


@dataclass(frozen=True)
class SpinBosonSpec:
    epsilon_sb: float = 1.0
    delta_sb: float = 1.0
    beta: float = 5.0
    xi: float = 0.1
    omega_c: float = 1.0
    omega_max: float = 5.0
    n_modes: int = 60
    dt: float = 1.50083e-3

    def __post_init__(self):
        for name in ("beta", "xi", "omega_c", "omega_max", "dt"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if int(self.n_modes) < 1:
            raise ValidationError("n_modes must be >= 1")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    def replace(self, **changes) -> "SpinBosonSpec":
        return SpinBosonSpec(**{**asdict(self), **changes})

    def to_json(self, **kwargs) -> str:
        return json.dumps(asdict(self), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "SpinBosonSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown spin-boson fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SpinBosonSpec":
        return cls.from_dict(json.loads(text))


DEFAULT_SPIN_BOSON = SpinBosonSpec()

# Desk-scale instance: default parameters on a 4-mode bath, 6 levels per mode.
DESK_MODES = 4
DESK_CUTOFF = 6
DESK_TIMES = np.linspace(0.0, 12.0, 25)


def desk_spec(**changes) -> SpinBosonSpec:
    return DEFAULT_SPIN_BOSON.replace(n_modes=DESK_MODES, **changes)


@dataclass(frozen=True)
class DiscretizedBath:
    frequencies: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).reshape(-1)
        c = np.asarray(self.couplings, dtype=float).reshape(-1)
        if w.shape != c.shape:
            raise ValidationError("frequencies and couplings differ in length")
        if w.size and (w[0] <= 0 or np.any(np.diff(w) <= 0)):
            raise ValidationError("bath frequencies must be positive and increasing")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "couplings", c)

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    def reorganization_sum(self) -> float:
        """``sum_k c_k^2 / (2 w_k^2)``."""
        return float(np.sum(self.couplings**2 / (2 * self.frequencies**2)))


def discretize_ohmic(spec: SpinBosonSpec) -> DiscretizedBath:
    """Uniform grid ``w_k = k dw`` with couplings matched to the Ohmic density.

    Matching ``(pi/2) c_k^2 / w_k`` per bin to ``(pi/2) xi w exp(-w/w_c)``
    gives ``c_k = w_k sqrt(xi dw exp(-w_k/w_c))``.
    """
    dw = spec.omega_max / spec.n_modes
    w = dw * np.arange(1, spec.n_modes + 1)
    c = w * np.sqrt(spec.xi * dw * np.exp(-w / spec.omega_c))
    return DiscretizedBath(w, c)


def continuum_reorganization(spec: SpinBosonSpec) -> float:
    """Continuum limit of :meth:`DiscretizedBath.reorganization_sum`, by quadrature.

    ``(1/pi) int_0^w_max J(w)/w dw`` with ``J(w) = (pi/2) xi w exp(-w/w_c)``.
    """
    val, _ = quad(lambda w: 0.5 * spec.xi * np.exp(-w / spec.omega_c), 0.0, spec.omega_max)
    return float(val)


def _check_dim(n_modes: int, cutoff: int) -> int:
    dim = 2 * cutoff**n_modes
    if dim > MAX_DIMENSION:
        raise ValidationError(f"vibronic dimension {dim} exceeds the cap {MAX_DIMENSION}")
    return dim


def spin_boson_hamiltonian(spec: SpinBosonSpec, bath: DiscretizedBath, mode_cutoff: int) -> np.ndarray:
    """Dense vibronic Hamiltonian; the electronic index is the most significant.

    Each bath oscillator contributes ``w (N + 1/2)`` and the position
    ``R = (a + a^dag)/sqrt(2 w)``; state 0 couples with ``-c R``, state 1
    with ``+c R``.  The matrix is real symmetric.
    """
    _check_dim(bath.n_modes, mode_cutoff)
    nb = mode_cutoff**bath.n_modes
    a = np.diag(np.sqrt(np.arange(1, mode_cutoff, dtype=float)), 1)
    levels = np.arange(mode_cutoff, dtype=float)
    h_bath = np.zeros(nb)
    coupling = np.zeros((nb, nb))
    for k, (w, c) in enumerate(zip(bath.frequencies, bath.couplings)):
        pre = mode_cutoff**k
        post = mode_cutoff ** (bath.n_modes - k - 1)
        h_bath += np.kron(np.kron(np.ones(pre), w * (levels + 0.5)), np.ones(post))
        r = (a + a.T) / np.sqrt(2 * w)
        coupling += c * np.kron(np.kron(np.eye(pre), r), np.eye(post))
    eye = np.eye(nb)
    h00 = spec.epsilon_sb * eye + np.diag(h_bath) - coupling
    h11 = -spec.epsilon_sb * eye + np.diag(h_bath) + coupling
    return np.block([[h00, spec.delta_sb * eye], [spec.delta_sb * eye, h11]])


def thermal_ensemble(bath: DiscretizedBath, mode_cutoff: int, beta: float,
                     tol: float = ENSEMBLE_TOL) -> list[tuple[tuple[int, ...], float]]:
    """Bath number states with Boltzmann weights, heaviest first.

    Members are kept until their (untruncated-normalized) weight reaches
    ``1 - tol``; the kept weights are then renormalized to sum to one.
    """
    if bath.n_modes == 0:
        return [((), 1.0)]
    q = np.exp(-beta * bath.frequencies)
    per_mode = [(1 - qk) * qk ** np.arange(mode_cutoff) for qk in q]
    members = []
    for occ in itertools.product(range(mode_cutoff), repeat=bath.n_modes):
        members.append((occ, float(np.prod([per_mode[k][n] for k, n in enumerate(occ)]))))
    members.sort(key=lambda m: (-m[1], m[0]))
    total, kept = 0.0, []
    for occ, wgt in members:
        kept.append((occ, wgt))
        total += wgt
        if total >= 1 - tol:
            break
    else:
        raise ValidationError(
            f"thermal ensemble captures only {total:.8f} of the weight; raise the mode cutoff"
        )
    return [(occ, wgt / total) for occ, wgt in kept]


class _ExactSpinBoson:
    """Eigendecomposition of the vibronic Hamiltonian, reused across initial states."""

    def __init__(self, spec: SpinBosonSpec, bath: DiscretizedBath, mode_cutoff: int):
        self.spec, self.bath, self.cutoff = spec, bath, mode_cutoff
        h = spin_boson_hamiltonian(spec, bath, mode_cutoff)
        self.nb = h.shape[0] // 2
        try:
            self.energies, self.vectors = np.linalg.eigh(h)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(str(exc)) from exc
        self.ensemble = thermal_ensemble(bath, mode_cutoff, spec.beta)

    def populations(self, sigma0_diag, times) -> np.ndarray:
        """``(len(times), 2)`` electronic populations for a diagonal start."""
        times = np.asarray(times, dtype=float)
        phases = np.exp(-1j * np.outer(self.energies, times))
        out = np.zeros((times.size, 2))
        shape = (self.cutoff,) * self.bath.n_modes
        for occ, wgt in self.ensemble:
            bath_idx = int(np.ravel_multi_index(occ, shape)) if occ else 0
            for e, p_e in enumerate(sigma0_diag):
                if p_e == 0:
                    continue
                c0 = self.vectors[e * self.nb + bath_idx]
                psi = self.vectors @ (c0[:, None] * phases)
                dens = (np.abs(psi) ** 2).reshape(2, self.nb, times.size).sum(axis=1)
                out += wgt * p_e * dens.T
        return out


def _sigma_diag(sigma0) -> np.ndarray:
    s = np.asarray(sigma0)
    d = np.real(np.diag(s)) if s.ndim == 2 else np.real(s)
    if d.shape != (2,) or np.any(d < 0) or abs(d.sum() - 1) > 1e-12:
        raise ValidationError("initial electronic state must be a diagonal density matrix")
    return d


def reference_propagate(spec: SpinBosonSpec, bath: DiscretizedBath, mode_cutoff: int,
                        sigma0, times) -> PopulationSeries:
    """Exact electronic populations from a product of ``sigma0`` and a thermal bath."""
    solver = _ExactSpinBoson(spec, bath, mode_cutoff)
    times = np.asarray(times, dtype=float)
    pops = solver.populations(_sigma_diag(sigma0), times)
    return PopulationSeries(times, ("sigma00", "sigma11"), pops, np.zeros(times.size))


@dataclass(frozen=True)
class SuperoperatorSeries:
    times: np.ndarray
    matrices: np.ndarray  # (n_times, 2, 2); column j is the evolution of state j

    def rescales(self) -> np.ndarray:
        return np.array([max(1.0, np.linalg.norm(p, 2)) for p in self.matrices])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,p00,p01,p10,p11,rescale\n")
        for t, p, r in zip(self.times, self.matrices, self.rescales()):
            vals = (t, p[0, 0], p[0, 1], p[1, 0], p[1, 1], r)
            buf.write(",".join(f"{v:.12g}" for v in vals) + "\n")
        return buf.getvalue()


def population_superoperator(spec: SpinBosonSpec, bath: DiscretizedBath, mode_cutoff: int,
                             times) -> SuperoperatorSeries:
    solver = _ExactSpinBoson(spec, bath, mode_cutoff)
    times = np.asarray(times, dtype=float)
    col0 = solver.populations((1.0, 0.0), times)
    col1 = solver.populations((0.0, 1.0), times)
    mats = np.stack([col0, col1], axis=2)
    return SuperoperatorSeries(times, mats)


@dataclass(frozen=True)
class DilatedUnitary:
    time: float
    matrix: np.ndarray
    rescale: float = 1.0

    @property
    def block(self) -> np.ndarray:
        return self.matrix[:2, :2]


def dilate(p, time: float = 0.0, strict: bool = False) -> DilatedUnitary:
    """Unitary ``[[P, sqrt(I - P P^dag)], [sqrt(I - P^dag P), -P^dag]]``.

    A population propagator may have operator norm above one; it is divided
    by its norm first and the factor is kept in ``rescale``.  With
    ``strict=True`` a norm above ``1 + 1e-8`` raises instead.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 propagator, got {p.shape}")
    smax = float(np.linalg.norm(p, 2))
    if strict and smax > 1 + 1e-8:
        raise ValidationError(f"propagator is not a contraction (norm {smax:.12g})")
    rescale = smax if smax > 1 else 1.0
    q = p / rescale
    # With q = W S V^T the two square roots share the singular vectors, so
    # the off-diagonal blocks cancel exactly even when S is close to 1.
    w, s, vt = np.linalg.svd(q)
    c = np.sqrt(np.clip(1.0 - s**2, 0.0, None))
    top = w @ np.diag(c) @ w.T
    bottom = vt.T @ np.diag(c) @ vt
    u = np.block([[q, top], [bottom, -q.T]])
    return DilatedUnitary(float(time), u, rescale)


def _padded(sigma0_pop) -> np.ndarray:
    v = np.asarray(sigma0_pop, dtype=float).reshape(-1)
    if v.shape != (2,) or np.any(v < 0) or abs(v.sum() - 1) > 1e-12:
        raise ValidationError("populations must be non-negative and sum to 1")
    return np.concatenate([v, [0.0, 0.0]])


def dilated_step(u: DilatedUnitary, sigma0_pop) -> np.ndarray:
    """First two components of ``U (s0, s1, 0, 0)``, times the rescale factor."""
    return u.rescale * (u.matrix @ _padded(sigma0_pop))[:2]


def snail_dilated_step(u: DilatedUnitary, sigma0_pop, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Same as :func:`dilated_step`, evaluated by running the compiled SNAIL circuit."""
    vec = _padded(sigma0_pop)
    norm = np.linalg.norm(vec)
    circuit = compile_circuit(decompose_2q(u.matrix))
    out = run_circuit(circuit, FockState.from_qubits(vec / norm, cutoff))
    amps = out.qubit_amplitudes()[:2]
    return (u.rescale * norm * amps).real
