import numpy as np
import pytest
from hypothesis import strategies as st

from vqe_forge.pauli import PauliTerm

AXES = ("I", "X", "Y", "Z")


@st.composite
def pauli_terms(draw, n_qubits=4):
    labels = draw(st.lists(st.sampled_from(AXES), min_size=n_qubits, max_size=n_qubits))
    re = draw(st.floats(-2, 2, allow_nan=False))
    im = draw(st.floats(-2, 2, allow_nan=False))
    return PauliTerm(complex(re, im), {i: a for i, a in enumerate(labels)})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n):
    a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return a / np.linalg.norm(a)


# acceptance bookkeeping: tests tagged @pytest.mark.criterion(k, text) are
# folded into one PASS/FAIL/SKIP line per criterion at the end of the run
_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    entry = _criteria.setdefault(number, {"text": text, "status": "PASS", "note": ""})
    if report.failed:
        entry["status"] = "FAIL"
        entry["note"] = str(report.longrepr).strip().splitlines()[-1][:160]
    elif report.skipped and entry["status"] == "PASS":
        entry["status"] = "SKIP"
        entry["note"] = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        line = f"criterion {number:2d} {entry['status']:4s} {entry['text']}"
        if entry["note"]:
            line += f"  [{entry['note']}]"
        terminalreporter.write_line(line)
