import numpy as np
import pytest


def random_hermitian(rng, k, scale=1.0):
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    return scale * (a + a.conj().T) / 2


def haar_unitary(rng, k):
    # QR of a complex Gaussian with the phase of R's diagonal removed.
    z = (rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record(number, passed, detail):
    """Store one acceptance line; printed at the end of the session."""
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
