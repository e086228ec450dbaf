"""Command-line entry point: ``sbm {map,transpile,simulate,bench,selftest}``.

Every command prints a JSON summary (sorted keys) to stdout, or writes it to
``--out``/``summary.json``.  Exit status is 0 when all checks pass, 1 when a
check fails and 2 when the input does not validate.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from ._validation import ValidationError, check_unitary
from .fock import block_residuals, dyson_maleev, gamma_k, sbm_map
from .numerics import expm_hermitian
from .simulate import DEFAULT_CUTOFF, WAVENUMBER_TO_RAD_PER_FS, propagate_dynamics
from .snail import (
    UnstableOscillatorWarning,
    compile_1q,
    cross_kerr_cz,
    rx_matrix,
    rx_params,
    rz_matrix,
    rz_params,
    snail_operator,
)
from .transpile import circuit_fidelity, compile_circuit, decompose, decompose_2q, reconstruct
from . import models

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

# Acceptance thresholds; SBM_TOL never changes these.
DYNAMICS_TOL = 1e-8
LEAKAGE_TOL = 1e-10
FIDELITY_TOL = 1e-9
DILATION_TOL = 1e-10


def reporting_tol(default: float) -> float:
    """Tolerance used for ``ok`` flags in reports, overridable by ``SBM_TOL``."""
    raw = os.environ.get("SBM_TOL")
    if not raw:
        return default
    try:
        val = float(raw)
    except ValueError:
        raise ValidationError(f"SBM_TOL={raw!r} is not a number") from None
    if not val > 0:
        raise ValidationError("SBM_TOL must be positive")
    return val


# --------------------------------------------------------------------------
# I/O helpers


def parse_matrix(obj) -> np.ndarray:
    """Matrix from JSON: nested lists of numbers or of ``[re, im]`` pairs,
    optionally under ``"matrix"``, or separate ``"real"``/``"imag"`` lists."""
    if isinstance(obj, dict):
        if "real" in obj:
            re = np.asarray(obj["real"], dtype=float)
            im = np.asarray(obj.get("imag", np.zeros_like(re)), dtype=float)
            return re + 1j * im
        obj = obj["matrix"]
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != 2:
        raise ValidationError(f"cannot read a matrix of shape {arr.shape}")
    return arr.astype(complex)


def load_matrix(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(str(exc)) from None
    try:
        return parse_matrix(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: {exc}") from None


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def emit(summary: dict, out: str | None) -> None:
    text = dumps(summary)
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


def _builtin_hamiltonian(name: str, args) -> np.ndarray:
    if name == "tls":
        return models.tls_hamiltonian(args.epsilon, args.delta)
    if name == "fmo":
        return models.fmo_hamiltonian()
    raise ValidationError(f"unknown model {name!r}")


# --------------------------------------------------------------------------
# commands


def cmd_map(args) -> int:
    h = load_matrix(args.input) if args.input else _builtin_hamiltonian(args.model, args)
    tol = reporting_tol(1e-12)
    try:
        res = sbm_map(h, args.cutoff)
    except ValidationError as exc:
        emit({"command": "map", "ok": False, "error": str(exc)}, None)
        return EXIT_INVALID
    top, off = res.residuals()
    ok = top <= tol and off <= tol
    if args.operator_out:
        Path(args.operator_out).write_text(res.operator.to_json(sort_keys=True) + "\n")
    emit({"command": "map", "k": res.k, "cutoff": res.operator.cutoff,
          "top_block_residual": top, "off_block_residual": off,
          "tolerance": tol, "ok": ok}, args.out)
    return EXIT_OK if ok else EXIT_INVALID


def _transpile_source(args) -> tuple[str, np.ndarray]:
    if args.unitary:
        return args.unitary, load_matrix(args.unitary)
    if args.hamiltonian:
        h = load_matrix(args.hamiltonian)
        return args.hamiltonian, expm_hermitian(h, args.tau * WAVENUMBER_TO_RAD_PER_FS)
    if args.model == "cz":
        return "cz", np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
    if args.model == "random":
        from scipy.stats import unitary_group

        return f"random(seed={args.seed})", unitary_group.rvs(4, random_state=args.seed)
    h = _builtin_hamiltonian(args.model, args)
    return args.model, expm_hermitian(h, args.tau * WAVENUMBER_TO_RAD_PER_FS)


def cmd_transpile(args) -> int:
    label, u = _transpile_source(args)
    u = check_unitary(u, name="input unitary")
    circ = decompose(u)
    snail = compile_circuit(circ, units="per unit gate time")
    fid = circuit_fidelity(circ, u)
    ok = fid >= 1 - FIDELITY_TOL
    if args.circuit_out:
        Path(args.circuit_out).write_text(
            dumps({"abstract": circ.to_dict(), "snail": snail.to_dict()}))
    emit({"command": "transpile", "source": label, "num_cz": circ.num_cz,
          "num_rotations": len(circ.rotations), "fidelity": fid,
          "reconstruction_error": float(np.max(np.abs(reconstruct(circ) - u))),
          "ok": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    h = load_matrix(args.hamiltonian) if args.hamiltonian else _builtin_hamiltonian(args.model, args)
    series = propagate_dynamics(h, args.tau, args.steps, initial=args.initial, mode=args.mode,
                                cutoff=args.cutoff)
    text = series.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write(outdir: Path | None, name: str, text: str) -> None:
    if outdir is not None:
        (outdir / name).write_text(text)


def _bench_closed(args, outdir) -> tuple[dict, dict]:
    h = _builtin_hamiltonian(args.model, args)
    direct = propagate_dynamics(h, args.tau, args.steps, initial=args.initial, mode="direct")
    snail = propagate_dynamics(h, args.tau, args.steps, initial=args.initial, mode="snail",
                               cutoff=args.cutoff)
    _write(outdir, f"{args.model}_direct.csv", direct.to_csv())
    _write(outdir, f"{args.model}_snail.csv", snail.to_csv())
    summary = {
        "max_deviation_snail_vs_direct": float(np.max(np.abs(snail.values - direct.values))),
        "max_leakage": float(np.max(snail.leakage)),
    }
    checks = {
        "max_deviation_snail_vs_direct": DYNAMICS_TOL,
        "max_leakage": LEAKAGE_TOL,
    }
    if args.model == "tls" and args.initial == 0:
        rabi = models.tls_rabi(args.epsilon, args.delta, direct.times, WAVENUMBER_TO_RAD_PER_FS)
        summary["max_deviation_snail_vs_rabi"] = float(np.max(np.abs(snail.values - rabi)))
        checks["max_deviation_snail_vs_rabi"] = DYNAMICS_TOL
    return summary, checks


def _bench_spinboson(args, outdir) -> tuple[dict, dict]:
    spec = models.SpinBosonSpec(
        epsilon_sb=args.epsilon_sb, delta_sb=args.delta_sb, beta=args.beta, xi=args.xi,
        omega_c=args.omega_c, omega_max=args.omega_max, n_modes=args.modes, dt=args.dt,
    )
    bath = models.discretize_ohmic(spec)
    times = np.linspace(0.0, args.tmax, args.ntimes)
    sup = models.population_superoperator(spec, bath, args.cutoff, times)
    v0 = np.array([1.0, 0.0])
    direct, snail, step_dev, e2e_dev = [], [], 0.0, 0.0
    for p, t in zip(sup.matrices, times):
        u = models.dilate(p, t)
        ref = p @ v0
        d = models.dilated_step(u, v0)
        s = models.snail_dilated_step(u, v0, cutoff=args.snail_cutoff)
        for v in ((1.0, 0.0), (0.0, 1.0), (0.3, 0.7)):
            step_dev = max(step_dev, float(np.max(np.abs(models.dilated_step(u, v) - p @ np.array(v)))))
        direct.append(ref)
        snail.append(s)
        e2e_dev = max(e2e_dev, float(np.max(np.abs(s - d))))
    labels = ("sigma00", "sigma11")
    zeros = np.zeros(times.size)
    direct_s = models.PopulationSeries(times, labels, np.array(direct), zeros)
    snail_s = models.PopulationSeries(times, labels, np.array(snail), zeros)
    _write(outdir, "spinboson_superoperator.csv", sup.to_csv())
    _write(outdir, "spinboson_direct.csv", direct_s.to_csv())
    _write(outdir, "spinboson_snail.csv", snail_s.to_csv())
    mats = sup.matrices
    summary = {
        "n_times": int(times.size),
        "identity_at_t0": float(np.max(np.abs(mats[0] - np.eye(2)))),
        "column_sum_error": float(np.max(np.abs(mats.sum(axis=1) - 1))),
        "dilation_deviation": step_dev,
        "end_to_end_deviation": e2e_dev,
        "max_rescale": float(np.max(sup.rescales())),
    }
    checks = {
        "identity_at_t0": 1e-10,
        "column_sum_error": 1e-8,
        "dilation_deviation": DILATION_TOL,
        "end_to_end_deviation": DYNAMICS_TOL,
    }
    return summary, checks


def cmd_bench(args) -> int:
    outdir = Path(args.out) if args.out else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    if args.model == "spinboson":
        summary, checks = _bench_spinboson(args, outdir)
    else:
        summary, checks = _bench_closed(args, outdir)
    failed = sorted(k for k, thr in checks.items() if not summary[k] <= thr)
    summary.update({"command": "bench", "model": args.model, "thresholds": checks,
                    "failed": failed, "ok": not failed})
    text = dumps(summary)
    _write(outdir, "summary.json", text)
    sys.stdout.write(text)
    return EXIT_OK if not failed else EXIT_FAIL


def selftest_summary(seed: int) -> dict:
    """Small, seeded versions of the core checks; deterministic for a given seed."""
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    out: dict = {"seed": seed}

    worst = 0.0
    for _ in range(50):
        k = int(rng.integers(2, 7))
        a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        h = (a + a.conj().T) / 2
        res = sbm_map(h, 2 * k)
        worst = max(worst, *block_residuals(res.operator.matrix, h))
    out["sbm_residual"] = worst

    g = np.linalg.matrix_power(gamma_k(3, 7).matrix, 2) / 2**1.5
    out["gamma3_entries_error"] = float(max(abs(g[0, 2] - 1), abs(g[3, 5] - math.sqrt(10)),
                                            abs(g[4, 6] - 3 * math.sqrt(15))))

    worst = 0.0
    for _ in range(200):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = (a + a.conj().T) / 2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnstableOscillatorWarning)
            params = compile_1q(h)
        top = snail_operator(params, 4).matrix[:2, :2]
        worst = max(worst, float(np.max(np.abs(top - h))))
    out["snail_roundtrip_residual"] = worst

    infid = 0.0
    for ang in rng.uniform(-2 * math.pi, 2 * math.pi, 20):
        for params, target in ((rz_params(ang), rz_matrix(ang)), (rx_params(ang), rx_matrix(ang))):
            u = expm_hermitian(params.logical_matrix())
            infid = max(infid, 1 - abs(np.trace(target.conj().T @ u)) / 2)
    out["rotation_infidelity"] = float(infid)

    cz = cross_kerr_cz(4).matrix
    idx = [0, 1, 4, 5]
    out["cross_kerr_cz_error"] = float(np.max(np.abs(cz[np.ix_(idx, idx)] - np.diag([1, 1, 1, -1]))))

    worst_f, max_cz = 0.0, 0
    for _ in range(50):
        u = unitary_group.rvs(4, random_state=rng)
        c = decompose_2q(u)
        worst_f = max(worst_f, 1 - circuit_fidelity(c, u))
        max_cz = max(max_cz, c.num_cz)
    out["transpile_infidelity"] = float(worst_f)
    out["transpile_max_cz"] = max_cz

    series = propagate_dynamics(models.tls_hamiltonian(50, 20), 5.0, 40, mode="snail")
    rabi = models.tls_rabi(50, 20, series.times, WAVENUMBER_TO_RAD_PER_FS)
    out["tls_deviation"] = float(np.max(np.abs(series.values - rabi)))
    out["tls_leakage"] = float(np.max(series.leakage))

    worst = 0.0
    for k in range(2, 7):
        d = 2 * k + 1
        sp, sm, sz = (op.matrix for op in dyson_maleev(k, d))
        worst = max(worst, float(np.max(np.abs(gamma_k(k, d).matrix - sp.conj().T))))
        comm = sp @ sm - sm @ sp - 2 * sz
        worst = max(worst, float(np.max(np.abs(comm[:, : d - 1]))))
    out["dyson_maleev_residual"] = worst

    limits = {
        "sbm_residual": 1e-12,
        "gamma3_entries_error": 1e-14,
        "snail_roundtrip_residual": 1e-12,
        "rotation_infidelity": 1e-10,
        "cross_kerr_cz_error": 1e-14,
        "transpile_infidelity": FIDELITY_TOL,
        "transpile_max_cz": 3,
        "tls_deviation": DYNAMICS_TOL,
        "tls_leakage": LEAKAGE_TOL,
        "dyson_maleev_residual": 1e-12,
    }
    failed = sorted(k for k, thr in limits.items() if not out[k] <= thr)
    out.update({"command": "selftest", "thresholds": limits, "failed": failed, "ok": not failed})
    return out


def cmd_selftest(args) -> int:
    summary = selftest_summary(args.seed)
    emit(summary, args.out)
    return EXIT_OK if summary["ok"] else EXIT_FAIL


# --------------------------------------------------------------------------
# argument parsing


def _add_tls_flags(p) -> None:
    p.add_argument("--epsilon", type=float, default=50.0, help="TLS bias, cm^-1")
    p.add_argument("--delta", type=float, default=20.0, help="TLS coupling, cm^-1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="map a Hermitian matrix onto one bosonic mode")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("input", nargs="?", help="JSON file holding the matrix")
    src.add_argument("--model", choices=("tls", "fmo"))
    _add_tls_flags(p)
    p.add_argument("--cutoff", type=int, default=None, help="Fock levels (default 2k)")
    p.add_argument("--operator-out", help="write the operator JSON here")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("transpile", help="decompose a unitary into rotations + CZ and compile")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--unitary", help="JSON file holding a 2x2 or 4x4 unitary")
    src.add_argument("--hamiltonian", help="JSON file holding a Hamiltonian in cm^-1")
    src.add_argument("--model", choices=("tls", "fmo", "cz", "random"))
    _add_tls_flags(p)
    p.add_argument("--tau", type=float, default=5.0, help="time step, fs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--circuit-out", help="write abstract and SNAIL circuits here")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_transpile)

    p = sub.add_parser("simulate", help="population dynamics as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--hamiltonian", help="JSON file holding a 2x2 or 4x4 Hamiltonian, cm^-1")
    src.add_argument("--model", choices=("tls", "fmo"))
    _add_tls_flags(p)
    p.add_argument("--mode", choices=("direct", "snail"), default="snail")
    p.add_argument("--tau", type=float, default=5.0, help="time step, fs")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--initial", type=int, default=0, help="initial site index (0-based)")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="benchmark snail-mode dynamics against references")
    bsub = p.add_subparsers(dest="model", required=True)
    for name in ("tls", "fmo"):
        b = bsub.add_parser(name)
        _add_tls_flags(b)
        b.add_argument("--tau", type=float, default=5.0, help="time step, fs")
        b.add_argument("--steps", type=int, default=200)
        b.add_argument("--initial", type=int, default=0)
        b.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
        b.add_argument("--out", help="output directory")
        b.set_defaults(func=cmd_bench)
    b = bsub.add_parser("spinboson")
    t1 = models.DEFAULT_SPIN_BOSON
    b.add_argument("--epsilon-sb", type=float, default=t1.epsilon_sb)
    b.add_argument("--delta-sb", type=float, default=t1.delta_sb)
    b.add_argument("--beta", type=float, default=t1.beta)
    b.add_argument("--xi", type=float, default=t1.xi)
    b.add_argument("--omega-c", type=float, default=t1.omega_c)
    b.add_argument("--omega-max", type=float, default=t1.omega_max)
    b.add_argument("--dt", type=float, default=t1.dt)
    b.add_argument("--modes", "--n-modes", dest="modes", type=int, default=models.DESK_MODES)
    b.add_argument("--cutoff", type=int, default=models.DESK_CUTOFF, help="levels per bath mode")
    b.add_argument("--snail-cutoff", type=int, default=DEFAULT_CUTOFF)
    b.add_argument("--tmax", type=float, default=float(models.DESK_TIMES[-1]))
    b.add_argument("--ntimes", type=int, default=models.DESK_TIMES.size)
    b.add_argument("--out", help="output directory")
    b.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="quick seeded consistency checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the summary JSON here")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        sys.stderr.write(f"sbm {args.command}: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
