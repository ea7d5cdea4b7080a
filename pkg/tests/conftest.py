"""Shared fixtures: the four example experiments, built once per session."""

from functools import lru_cache
from pathlib import Path

import pytest

from dsmkit.cli import ExperimentSpec, load_spec
from dsmkit.forward import add_noise, mesh_disk, scattered_traces
from dsmkit.reconstruction import reconstruct

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def example_spec(n: int) -> ExperimentSpec:
    return load_spec(CONFIGS / f"example{n}.json")


@lru_cache(maxsize=None)
def clean_traces(n: int):
    spec = example_spec(n)
    mesh = mesh_disk(spec.background.radius, spec.mesh_h)
    return tuple(scattered_traces(spec.medium, spec.influxes(), mesh, spec.probes, spec.formulation))


def noisy_traces(n: int, seed: int | None = None):
    spec = example_spec(n)
    seed = spec.seed if seed is None else seed
    return tuple(add_noise(t, spec.delta, seed, stream) for stream, t in enumerate(clean_traces(n)))


@lru_cache(maxsize=None)
def example_fields(n: int, noisy: bool = True):
    """``(mo, di)`` index fields of example ``n`` with its configured parameters."""
    spec = example_spec(n)
    low, high = noisy_traces(n) if noisy else clean_traces(n)
    return reconstruct(low, high, spec.grid(), spec.params, spec.background)


@pytest.fixture(scope="session")
def examples():
    return example_fields


# one line per acceptance criterion, echoed in the terminal summary so that
# the verdicts are visible even when output capture is on
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
