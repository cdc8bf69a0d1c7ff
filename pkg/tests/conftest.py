import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multipdo.grid import GridFunction, GridSpec
from multipdo.symbols import bracket, general_symbol, make_test_symbol

settings.register_profile("ci", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def banded(spec: GridSpec, B: float, seed: int) -> GridFunction:
    """Random complex spectrum on |xi| <= B."""
    rng = np.random.default_rng(seed)
    r = spec.frequency_norms()
    F = (rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)) * (r <= B)
    return GridFunction.from_spectrum(spec, F)


def expansion_symbols():
    """Five symbols used to compare the expansion with direct evaluation."""
    return {
        "constant": make_test_symbol("constant", c=1.0, N=2),
        "separable": make_test_symbol("separable", multipliers=[
            {"type": "bracket", "power": -1.0}, {"type": "gaussian", "width": 3.0}]),
        "oscillatory": make_test_symbol("oscillatory_x", multipliers=[
            {"type": "one"}, {"type": "bracket", "power": -0.5}], profile="exp"),
        "nonseparable": general_symbol(
            lambda x, xi: 1.0 / bracket(xi[..., 0, :] + 2 * xi[..., 1, :]), 2, 1, True,
            "nonseparable"),
        "x_dependent": general_symbol(
            lambda x, xi: (2.0 + np.sin(x[..., 0])) * np.exp(-((xi[..., 0, 0] - xi[..., 1, 0]) ** 2) / 50),
            2, 1, False, "x_dependent"),
    }


@pytest.fixture
def small_spec():
    return GridSpec(1, 32, 2.0)


# PASS/FAIL lines recorded by test_acceptance.py, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
