import numpy as np
import pytest

from sicmultiport.sic import qubit_sic, qutrit_sic


@pytest.fixture(scope="session")
def qubit_povm():
    return qubit_sic()


@pytest.fixture(scope="session")
def qutrit_povm():
    return qutrit_sic()


@pytest.fixture(scope="session")
def lines():
    from sicmultiport.tomography import derive_affine_lines

    return derive_affine_lines()


def haar_unitary(n, seed):
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")
