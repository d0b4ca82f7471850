from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []

TEST_SHIFTS = [Fraction(1, 3), Fraction(1, 5), Fraction(2, 5), Fraction(5, 12), Fraction(1, 7), Fraction(2, 3)]


def rationals(max_den: int = 64, lo: int = 0, hi: int = 1, open_hi: bool = True):
    """Fractions in [lo, hi) (or [lo, hi]) with bounded denominators."""

    @st.composite
    def build(draw):
        q = draw(st.integers(1, max_den))
        top = hi * q - (1 if open_hi else 0)
        p = draw(st.integers(lo * q, top))
        return Fraction(p, q)

    return build()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
