import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pokerrule.game import CardDistribution, GameSpec, build_game  # noqa: E402

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one acceptance criterion outcome; summarized at session end."""
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} {detail}")


@pytest.fixture
def clairvoyance_spec():
    return GameSpec.single_bet(CardDistribution.from_masses(10, {1: 0.5, 10: 0.5}),
                               CardDistribution.point(10, 5))


@pytest.fixture
def reverse_spec():
    return GameSpec.single_bet(CardDistribution.point(10, 5),
                               CardDistribution.from_masses(10, {1: 0.5, 10: 0.5}))


@pytest.fixture
def uniform_spec():
    return GameSpec.single_bet(CardDistribution.uniform(10), CardDistribution.uniform(10))


@pytest.fixture
def uniform_tree(uniform_spec):
    return build_game(uniform_spec)
