"""Shared fixtures and the acceptance summary printer."""

from __future__ import annotations

import numpy as np
import pytest

from codedpir.analysis import certify
from codedpir.field import FieldMatrix
from codedpir.retrieval import random_v
from codedpir.scheme import Scheme
from codedpir.storage import ParityCheck, SystemParams, make_mds_parity

_ACCEPTANCE: dict[str, str] = {}
_NOTES: list[str] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
    for note in _NOTES:
        terminalreporter.write_line(f"  note: {note}")


def certified_random_scheme(q: int, K: int, S: int, N: int = 2, seed: int = 0) -> Scheme:
    params = SystemParams.optimal(q, K, S, N)
    parity = make_mds_parity(K, S, q)
    for s in range(seed, seed + 50):
        scheme = Scheme(params, parity, random_v(params, np.random.default_rng(s)), seed=s)
        if certify(scheme).certified:
            return scheme
    raise AssertionError("no certified V found")


def tiny_scheme(seed: int = 26) -> Scheme:
    """q=2, K=3, S=1, L=1, T=R=2 with all-ones parity (certified for seed 26)."""
    params = SystemParams(q=2, N=2, K=3, S=1, L=1, T=2, R=2)
    parity = ParityCheck(FieldMatrix([[1], [1], [1]], 2))
    return Scheme(params, parity, random_v(params, np.random.default_rng(seed)), seed=seed)


@pytest.fixture(scope="session")
def acceptance_notes() -> list[str]:
    """Lines appended here are printed under the acceptance summary."""
    return _NOTES


@pytest.fixture(scope="session")
def scheme42() -> Scheme:
    return certified_random_scheme(65537, 4, 2)


@pytest.fixture(scope="session")
def scheme31() -> Scheme:
    return certified_random_scheme(65537, 3, 1)
