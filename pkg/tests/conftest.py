import numpy as np
import pytest

from planar_mhd import integrator
from planar_mhd.core import Parameters
from planar_mhd.grid import Grid, State

MASS_RTOL = 1e-12
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def mass_guard(monkeypatch):
    """Fail any test whose trajectory drifts in total mass."""
    start = integrator.Accumulators.start.__func__
    update = integrator.Accumulators.update

    def guarded_start(cls, state, params):
        acc = start(cls, state, params)
        acc._mass0 = float(np.sum(state.v) * state.grid.dx)
        return acc

    def guarded_update(self, state, params):
        mass = float(np.sum(state.v) * state.grid.dx)
        assert abs(mass - self._mass0) <= MASS_RTOL * self._mass0, (
            f"mass drifted to {mass!r} from {self._mass0!r} at t={state.t}"
        )
        update(self, state, params)

    monkeypatch.setattr(integrator.Accumulators, "start", classmethod(guarded_start))
    monkeypatch.setattr(integrator.Accumulators, "update", guarded_update)


@pytest.fixture
def normalized():
    return Parameters.paper_normalized(1.0, 1.0)


def smooth_state(n, eps=0.1):
    """Smooth boundary-compatible perturbation of the rest state (unit mass)."""
    g = Grid(n)
    xc, xn = g.centers, g.nodes
    return State(
        t=0.0,
        v=1.0 + eps * np.cos(np.pi * xc),
        u=eps * np.sin(np.pi * xn),
        w=np.column_stack([eps * np.sin(2 * np.pi * xn), 0.5 * eps * np.sin(np.pi * xn)]),
        b=np.column_stack([eps * np.sin(np.pi * xc), eps * np.sin(3 * np.pi * xc)]),
        theta=1.0 + eps * np.cos(2 * np.pi * xc),
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
