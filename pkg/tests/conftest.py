"""Shared fixtures and the acceptance-criterion summary."""
from collections import OrderedDict

import pytest

from bemrank import bem, preset

CRITERIA = OrderedDict([
    ("1", "preset x BEM x {harmonic, FDKD} SISO designs reach rank L*Q"),
    ("2", "MIMO harmonic and FDKD-MIMO designs reach rank N_T*L*Q"),
    ("3", "BEMC holds and every Lambda table is nonzero, analytic == numeric"),
    ("4a", "colliding harmonics break theta orthogonality (ratio > 0.1)"),
    ("4b", "geometry with L_P*L > N_P loses rank"),
    ("4c", "S3 harmonic MIMO with N_T=3 is refused"),
    ("5", "algebraic invariants"),
    ("6", "end-to-end LS estimator"),
])

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion checked by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _outcomes.setdefault(marker.args[0], [])
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(crit, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit, text in CRITERIA.items():
        results = _outcomes.get(crit)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"{status:7s} {crit:3s} {text}")


@pytest.fixture(scope="session")
def s1():
    return preset("s1")


@pytest.fixture(scope="session")
def s1_ce(s1):
    return bem("ce", s1.N, s1.Q)


@pytest.fixture
def fig1():
    """Two clusters of three pilots at 0..2 and 8..10."""
    from bemrank import SystemGeometry

    return SystemGeometry(N=16, N_P=2, P_sep=8, P_b=1, L_P=3, B_c=1, L=1, Q=1)
