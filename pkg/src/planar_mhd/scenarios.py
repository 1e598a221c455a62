"""Built-in initial-data presets.

Every preset is renormalized on the discrete grid so that the midpoint mass
``sum(v) dx`` equals one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid, State

Profile = Callable[..., object]


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    v0: Profile
    u0: Profile
    w0: Profile
    b0: Profile
    theta0: Profile
    options: dict = field(default_factory=dict)
    randomized: bool = False

    def build(self, n_cells: int, seed: int | None = None, **overrides) -> State:
        """Sample the preset on ``n_cells`` cells and validate it."""
        unknown = set(overrides) - set(self.options)
        if unknown:
            raise ScenarioError(f"scenario {self.name!r} has no option(s) {sorted(unknown)}")
        opts = {**self.options, **overrides}
        if self.randomized:
            opts["coeffs"] = draw_random_coefficients(np.random.default_rng(seed), int(opts["modes"]))
        g = Grid(n_cells)
        xc, xn = g.centers, g.nodes
        fields = {
            "v": np.broadcast_to(self.v0(xc, **opts), xc.shape).astype(float),
            "u": np.broadcast_to(self.u0(xn, **opts), xn.shape).astype(float),
            "w": np.column_stack([np.broadcast_to(c, xn.shape) for c in self.w0(xn, **opts)]),
            "b": np.column_stack([np.broadcast_to(c, xc.shape) for c in self.b0(xc, **opts)]),
            "theta": np.broadcast_to(self.theta0(xc, **opts), xc.shape).astype(float),
        }
        validate_initial_fields(fields)
        fields["v"] = fields["v"] / (np.sum(fields["v"]) * g.dx)
        # endpoint zeros are imposed exactly; profiles vanish there analytically
        fields["u"][[0, -1]] = 0.0
        fields["w"][[0, -1]] = 0.0
        return State(t=0.0, **fields)


def validate_initial_fields(fields: dict) -> None:
    """Check initial-data invariants, naming the violated one."""
    if not np.all(fields["v"] > 0):
        raise ScenarioError(f"initial specific volume v0 must be positive (min {np.min(fields['v']):.4g})")
    if not np.all(fields["theta"] > 0):
        raise ScenarioError(f"initial temperature theta0 must be positive (min {np.min(fields['theta']):.4g})")
    for name in ("u", "w"):
        ends = np.asarray(fields[name])[[0, -1]]
        if np.max(np.abs(ends)) > 1e-12:
            raise ScenarioError(f"initial {name}0 must vanish at both endpoints")
    for name in fields:
        if not np.all(np.isfinite(fields[name])):
            raise ScenarioError(f"initial {name}0 contains non-finite values")


def _zero(x, **_):
    return np.zeros_like(x)


def _zero_pair(x, **_):
    return np.zeros_like(x), np.zeros_like(x)


def _one(x, **_):
    return np.ones_like(x)


def _sin(k):
    return lambda x: np.sin(k * np.pi * x)


_s1, _s2, _s3 = _sin(1), _sin(2), _sin(3)


RANDOM_FIELDS = ("v", "u", "w1", "w2", "b1", "b2", "theta")


def draw_random_coefficients(rng: np.random.Generator, modes: int) -> dict[str, np.ndarray]:
    """Fourier coefficients with 1/k^2 decay, drawn in a fixed field order."""
    decay = np.arange(1, modes + 1) ** 2
    return {name: rng.uniform(-1.0, 1.0, size=modes) / decay for name in RANDOM_FIELDS}


def _series(x, coeffs, basis):
    return sum(c * basis((k + 1) * np.pi * x) for k, c in enumerate(coeffs))


# cosine series keep zero slope at the endpoints, sine series vanish there
def _rand_v(x, amplitude, modes, coeffs):
    return 1.0 + amplitude * _series(x, coeffs["v"], np.cos)


def _rand_u(x, amplitude, modes, coeffs):
    return amplitude * _series(x, coeffs["u"], np.sin)


def _rand_w(x, amplitude, modes, coeffs):
    return amplitude * _series(x, coeffs["w1"], np.sin), amplitude * _series(x, coeffs["w2"], np.sin)


def _rand_b(x, amplitude, modes, coeffs):
    return amplitude * _series(x, coeffs["b1"], np.sin), amplitude * _series(x, coeffs["b2"], np.sin)


def _rand_theta(x, amplitude, modes, coeffs):
    return 1.0 + amplitude * _series(x, coeffs["theta"], np.cos)


def _build_registry() -> dict[str, Scenario]:
    reg = {}

    reg["rest"] = Scenario(
        name="rest",
        description="v = theta = 1, all velocities and fields zero",
        v0=_one, u0=_zero, w0=_zero_pair, b0=_zero_pair, theta0=_one,
    )
    reg["ns-limit"] = Scenario(
        name="ns-limit",
        description="b = w = 0; the compressible Navier-Stokes reduction",
        v0=lambda x, amp_v, amp_u: 1.0 + amp_v * np.sin(2 * np.pi * x),
        u0=lambda x, amp_v, amp_u: amp_u * _s1(x),
        w0=_zero_pair,
        b0=_zero_pair,
        theta0=lambda x, amp_v, amp_u: 1.0 + 0.5 * np.cos(np.pi * x) ** 2,
        options={"amp_v": 0.3, "amp_u": 0.5},
    )
    reg["large-oscillation"] = Scenario(
        name="large-oscillation",
        description=(
            "v0 = 1 + amp_v sin(2 pi x) (unit mass), theta0 = 1 + 0.5 cos^2(pi x), "
            "u0 = amp_u sin(pi x), w0 = 0.5 (sin(2 pi x), sin(pi x)), b0 = (sin(pi x), 0.5 sin(2 pi x))"
        ),
        v0=lambda x, amp_v, amp_u: 1.0 + amp_v * np.sin(2 * np.pi * x),
        u0=lambda x, amp_v, amp_u: amp_u * _s1(x),
        w0=lambda x, amp_v, amp_u: (0.5 * _s2(x), 0.5 * _s1(x)),
        b0=lambda x, amp_v, amp_u: (_s1(x), 0.5 * _s2(x)),
        theta0=lambda x, amp_v, amp_u: 1.0 + 0.5 * np.cos(np.pi * x) ** 2,
        options={"amp_v": 0.5, "amp_u": 1.0},
    )
    reg["magnetic-shear"] = Scenario(
        name="magnetic-shear",
        description="u0 = w0 = 0, b0 with a steep tanh shear layer at x = 1/2",
        v0=_one,
        u0=_zero,
        w0=_zero_pair,
        b0=lambda x, strength, width: (
            strength * _s1(x) * np.tanh((x - 0.5) / width),
            0.5 * strength * _s2(x),
        ),
        theta0=_one,
        options={"strength": 2.0, "width": 0.05},
    )
    reg["smooth"] = Scenario(
        name="smooth",
        description="small smooth perturbation of the rest state in every field",
        v0=lambda x, eps: 1.0 + eps * np.cos(np.pi * x),
        u0=lambda x, eps: eps * _s1(x),
        w0=lambda x, eps: (eps * _s2(x), 0.5 * eps * _s1(x)),
        b0=lambda x, eps: (eps * _s1(x), eps * _s3(x)),
        theta0=lambda x, eps: 1.0 + eps * np.cos(2 * np.pi * x),
        options={"eps": 0.1},
    )
    reg["random-perturbation"] = Scenario(
        name="random-perturbation",
        description="seeded random Fourier perturbation of the rest state, boundary compatible",
        v0=_rand_v, u0=_rand_u, w0=_rand_w, b0=_rand_b, theta0=_rand_theta,
        options={"amplitude": 0.2, "modes": 6},
        randomized=True,
    )
    return reg


SCENARIOS = _build_registry()


def builtin_scenarios() -> list[Scenario]:
    return list(SCENARIOS.values())


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; available: {', '.join(SCENARIOS)}") from None
