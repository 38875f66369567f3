import numpy as np
import pytest

from spectral_cutoff import SignalSpectrum, WeightSequence

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def record(criterion, passed, detail=""):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: (int(s.split(".")[0][1:]), s)):
        ok, detail = ACCEPTANCE[name]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def d3t1():
    return SignalSpectrum.power_law(3.0), WeightSequence.power_law(1.0)
