import json
from pathlib import Path

import pytest

from whithamlab import suites
from whithamlab.numerics import ToleranceConfig

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
DEFAULT_CONFIG = CONFIGS / "default.json"


@pytest.fixture(scope="session")
def default_config():
    return json.loads(DEFAULT_CONFIG.read_text())


@pytest.fixture(scope="session")
def tol():
    return ToleranceConfig()


@pytest.fixture(scope="session")
def g0_cfgs(default_config, tol):
    return {b["name"]: suites.build_genus0(b, tol) for b in default_config["genus0"]}


@pytest.fixture(scope="session")
def g1_cfgs(default_config, tol):
    return {b["name"]: suites.build_genus1(b, tol) for b in default_config["genus1"]}


@pytest.fixture
def write_config(tmp_path):
    """Dump a config dict to a temp file and return its path."""

    def write(config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(config, indent=2))
        return path

    return write


# one line per acceptance criterion, echoed in the terminal summary even without -s
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").rstrip("ab"))):
            terminalreporter.write_line(line)
