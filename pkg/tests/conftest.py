import json
import shutil
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from evflex.scenario import FleetCache, canonical_specs, run_matrix  # noqa: E402
from evflex.system import bundled_config_path  # noqa: E402

TIMINGS: dict = {}


@pytest.fixture(scope="session")
def tiny_config(tmp_path_factory):
    """The bundled three-region system cut to one day per period and two years."""
    src = Path(bundled_config_path())
    d = tmp_path_factory.mktemp("tiny")
    for f in src.parent.iterdir():
        shutil.copy(f, d / f.name)
    raw = json.loads(src.read_text())
    raw["name"] = "tiny"
    raw["years"] = [2020, 2030]
    raw["periods"] = [{"name": "winter", "start_hour": 504, "hours": 24},
                      {"name": "summer", "start_hour": 4872, "hours": 24}]
    raw["fleet"]["sample_size"] = 40
    path = d / "system.json"
    path.write_text(json.dumps(raw, indent=1))
    return str(path)


@pytest.fixture(scope="session")
def tiny_matrix(tiny_config):
    return run_matrix(canonical_specs(system_config=tiny_config, seed=3))


@pytest.fixture(scope="session")
def matrix_cache():
    return FleetCache()


@pytest.fixture(scope="session")
def full_matrix(matrix_cache):
    """All six scenarios on the bundled system with default settings."""
    t0 = time.perf_counter()
    results = run_matrix(canonical_specs(seed=0), matrix_cache)
    TIMINGS["full_matrix"] = time.perf_counter() - t0
    return results


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""
    def record(number: int, ok: bool, detail: str):
        _CRITERIA[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(_CRITERIA[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
