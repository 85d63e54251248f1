import warnings

import pytest
from hypothesis import HealthCheck, settings

from cvdiscord import validation
from cvdiscord.covariance import TwoModeState

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# parts of each acceptance criterion, printed as one line per criterion
ACCEPTANCE_PARTS: dict[int, list[tuple[bool, str]]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_PARTS.setdefault(number, []).append((bool(passed), detail))


def acceptance_lines() -> list[str]:
    lines = []
    for number in sorted(ACCEPTANCE_PARTS):
        parts = ACCEPTANCE_PARTS[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{'ok' if ok else 'FAILED'} {d}" for ok, d in parts)
        lines.append(f"criterion {number}: {status} ({detail})")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sts_reference():
    return TwoModeState.sts(1.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def mts_reference():
    return TwoModeState.mts(1.0, 0.0, 0.7853981633974483)


@pytest.fixture(scope="session")
def oracle_rho():
    """Oracle density matrices at dimension 60, shared across test modules."""

    def build(state):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return validation.oracle_density(state, validation.ORACLE_DIM)

    return build


@pytest.fixture(scope="session")
def sts_brute(sts_reference, oracle_rho):
    """Oracle entropies and geometric discord of the STS reference, number basis."""
    from cvdiscord import oracle
    from cvdiscord.fock import MeasurementBasis

    return oracle.brute_quantities(oracle_rho(sts_reference), MeasurementBasis())
