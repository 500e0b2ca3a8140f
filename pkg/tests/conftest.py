from pathlib import Path

import pytest

from invmine.lang import parse

CORPUS = Path(__file__).resolve().parents[1] / "src" / "invmine" / "corpus"


def load(name: str):
    return parse((CORPUS / f"{name}.mpl").read_text())


@pytest.fixture(scope="session")
def peterson():
    return load("peterson2")


@pytest.fixture(scope="session")
def toggle():
    return load("toggle")


@pytest.fixture(scope="session")
def corpus_paths():
    return sorted(CORPUS.glob("*.mpl"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="run the multi-minute corpus checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: takes minutes; enabled by --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
