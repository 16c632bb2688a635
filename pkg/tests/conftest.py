import pytest

from greq.validate import run_diagnostics
from tests.support import CONFERENCE, parse_ok


@pytest.fixture(scope="session")
def conference_source() -> str:
    return CONFERENCE.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def conference_model(conference_source):
    return parse_ok(conference_source)


@pytest.fixture(scope="session")
def conference_report(conference_model):
    return run_diagnostics(conference_model)
