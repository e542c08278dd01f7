"""Shared fixtures plus a per-criterion summary for the acceptance suite."""

import numpy as np
import pytest

import idrank as ir

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _acceptance_results[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results.items():
        terminalreporter.write_line(f"{name}: {outcome}")


@pytest.fixture(scope="session")
def plane2_8000():
    """2-D patch in R^10, 8000 points; reused by decimation tests."""
    return ir.generate(ir.hyperplane(2, 10, 8000, seed=11))


def random_hidden_states(rng: np.random.Generator) -> ir.HiddenStateSet:
    """A random float32 hidden-state set for GHS round-trip tests."""
    n_layers = int(rng.integers(1, 5))
    n_points = int(rng.integers(1, 40))
    layers = [
        ir.PointCloud(
            rng.normal(size=(n_points, int(rng.integers(1, 12)))).astype(np.float32)
        )
        for _ in range(n_layers)
    ]
    tags = [f"t{i}" for i in range(int(rng.integers(0, 3)))]
    return ir.HiddenStateSet(
        layers=layers,
        metadata={"model": "m", "dataset": "d", "pooling": "mean", "tags": tags},
    )
