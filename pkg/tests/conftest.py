import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record the outcome of an acceptance criterion for the end-of-run table."""

    def _report(number: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ball_stream(rng, T, R, d, B):
    """Bounded streams with a random drift per replicate, scaled into the ball of radius B."""
    X = rng.uniform(-1, 1, size=(T, R, d)) * 0.6 + 0.3 * rng.uniform(-1, 1, size=(1, R, d))
    X /= np.maximum(1.0, np.linalg.norm(X, axis=-1, keepdims=True))
    return X * B
