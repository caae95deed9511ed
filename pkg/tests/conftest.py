import pytest

from sunedge.simkit.config import desk_scenario
from sunedge.simkit.run import run_simulation
from sunedge.simkit.scenario import build_scenario

CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def desk_config():
    return desk_scenario()


@pytest.fixture(scope="session")
def desk(desk_config):
    return build_scenario(desk_config)


@pytest.fixture(scope="session")
def desk_runs(desk_config, desk):
    """Every strategy on the shared desk-scale scenario, computed once."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run_simulation(desk_config, name, desk)
        return cache[name]

    return get
