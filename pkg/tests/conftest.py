import json
from importlib import resources

import pytest

from ranconflict.catalog import load_catalog
from ranconflict.evaluation import SeverityMatrix
from ranconflict.graph import load_graph
from ranconflict.sandbox import load_scenario

DATA = resources.files("ranconflict") / "data"
CONDITION = "rome-static-6ue"
APPS = ["a1", "a2", "a3", "a4", "a5"]
PRIORITY_ORDER = {"a1": 5, "a2": 4, "a3": 3, "a4": 2, "a5": 1}


def data_path(name: str) -> str:
    return str(DATA / name)


@pytest.fixture(scope="session")
def slicing_catalog():
    return load_catalog(data_path("slicing_catalog.json"))


@pytest.fixture(scope="session")
def toy_catalog():
    return load_catalog(data_path("toy_catalog.json"))


@pytest.fixture(scope="session")
def toy_graph(toy_catalog):
    return load_graph(data_path("toy_graph.json"), toy_catalog)


@pytest.fixture(scope="session")
def scenario():
    return load_scenario(data_path("default_scenario.json"))


@pytest.fixture(scope="session")
def transcribed():
    return json.loads((DATA / "transcribed_prb_ecdfs.json").read_text())["curves"]


@pytest.fixture(scope="session")
def embb_table():
    return SeverityMatrix.from_dict(json.loads((DATA / "embb_severity_table.json").read_text()))


@pytest.fixture(scope="session")
def urllc_table():
    return SeverityMatrix.from_dict(json.loads((DATA / "urllc_severity_table.json").read_text()))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
