import numpy as np
import pytest

from neurosyntax.syntax import LexicalItem, Leaf

ACCEPTANCE_RESULTS: dict[str, str] = {}


def item(id_, cat, emb=(0.0, 0.0), w=0.5):
    return LexicalItem(id_, cat, tuple(emb), w)


def leaf(id_, cat, emb=(0.0, 0.0), w=0.5):
    return Leaf(item(id_, cat, emb, w))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in report.keywords:
        if mark.startswith("criterion_"):
            prev = ACCEPTANCE_RESULTS.get(mark)
            ok = report.passed and prev != "FAIL"
            ACCEPTANCE_RESULTS[mark] = "PASS" if ok else "FAIL"


def pytest_configure(config):
    for k in range(1, 9):
        config.addinivalue_line("markers", f"criterion_{k}: acceptance criterion {k}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split("_")[1])):
        terminalreporter.write_line(f"{ACCEPTANCE_RESULTS[key]}  {key.replace('_', ' ')}")
