import os
from pathlib import Path

import numpy as np
import pytest

from relaxo import SparseMatrix, random_spd, read_matrix_market

DATA_DIRS = [Path(os.environ["RELAXO_DATA"])] if os.environ.get("RELAXO_DATA") else []
DATA_DIRS.append(Path(__file__).parent / "data")


def find_matrix(name):
    """Local copy of a named test matrix, or None."""
    for d in DATA_DIRS:
        for suffix in (".mtx", ".mtx.gz"):
            for stem in (name.lower(), name.upper()):
                p = d / f"{stem}{suffix}"
                if p.exists():
                    return p
    return None


def load_matrix_or_skip(name):
    path = find_matrix(name)
    if path is None:
        pytest.skip(f"{name} not available locally (set RELAXO_DATA)")
    return read_matrix_market(path)


def dense_sor_operator(A, b, omega):
    """G = (D + wL)^-1 ((1-w) D - w U), c = w (D + wL)^-1 b, built densely."""
    A = np.asarray(A, dtype=float)
    D = np.diag(np.diag(A))
    L = np.tril(A, -1)
    U = np.triu(A, 1)
    M = D + omega * L
    G = np.linalg.solve(M, (1 - omega) * D - omega * U)
    c = omega * np.linalg.solve(M, b)
    return G, c


def random_dense_spd(n, rng, unit_diagonal=False):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ np.diag(rng.uniform(0.2, 5.0, n)) @ Q.T
    A = 0.5 * (A + A.T)
    if unit_diagonal:
        d = 1.0 / np.sqrt(np.diag(A))
        A = d[:, None] * A * d[None, :]
        A = 0.5 * (A + A.T)
        np.fill_diagonal(A, 1.0)
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def spd_suite():
    """30 unit-diagonal SPD systems, n = 30, spectrum inside [0.1, 1.9]."""
    rng = np.random.default_rng(2024)
    return [(random_spd(30, rng), rng.standard_normal(30)) for _ in range(30)]


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    crit = getattr(report, "_criterion", None)
    if crit is None:
        return
    num, text = crit
    _, outcomes = _CRITERIA.setdefault(num, (text, set()))
    if report.failed:
        outcomes.add("FAIL")
    elif report.skipped:
        outcomes.add("SKIPPED")
    elif report.when == "call":
        outcomes.add("PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        text, outcomes = _CRITERIA[num]
        status = next(s for s in ("FAIL", "PASS", "SKIPPED") if s in outcomes)
        terminalreporter.write_line(f"criterion {num:>2}: {status:<7} {text}")
