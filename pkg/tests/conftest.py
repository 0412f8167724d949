from __future__ import annotations

import pytest

from eosynth.ontology import load_default_ontology
from eosynth.templates import fixture_store


@pytest.fixture(scope="session")
def ontology():
    return load_default_ontology()


@pytest.fixture(scope="session")
def store():
    return fixture_store()


# Acceptance verdicts, printed once at the end of the run.
ACCEPTANCE: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE[key])
