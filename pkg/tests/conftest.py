from __future__ import annotations

import csv
import warnings
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

warnings.filterwarnings("ignore", message="The TBB threading layer")

settings.register_profile(
    "massform", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("massform")

DATA = Path(__file__).parent / "data"


def read_fixture(name: str) -> list[dict[str, str]]:
    with open(DATA / name, newline="") as fh:
        return list(csv.DictReader(fh))


def frac(s: str) -> Fraction | float:
    return float("inf") if s in ("inf", "/") else Fraction(s)


@pytest.fixture(scope="session")
def genera():
    """Bundled genus descriptors, loaded once per session so theta caches are shared."""
    from massform.genus import load_genus

    cache: dict[str, object] = {}

    def get(name: str):
        if name not in cache:
            cache[name] = load_genus(name)
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from tests import acceptance_report

    lines = acceptance_report.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
