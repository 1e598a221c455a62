"""Semi-implicit time advancement.

One step is a sequential sweep u -> v -> w -> b -> theta. Each diffusion
operator is treated implicitly with coefficients lagged from the latest
available fields, so every sub-solve is a tridiagonal system. The pressure
and magnetic-pressure gradient in the momentum equation and the magnetic
coupling terms use the freshest explicit values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .core import Parameters, conductivity, viscosity
from .diagnostics import RepresentationTerms, dissipation_rate, y_rate
from .grid import B_CLOSURE, Grid, State
from .tridiag import SingularSystem, solve_tridiagonal

__all__ = [
    "Accumulators",
    "AdvanceResult",
    "DtUnderflow",
    "Forcing",
    "PositivityFailure",
    "SingularSystem",
    "StepControls",
    "advance",
    "stable_dt",
    "step",
]

logger = logging.getLogger(__name__)


class PositivityFailure(ArithmeticError):
    def __init__(self, field_name: str, index: int, value: float):
        super().__init__(f"{field_name} nonpositive at cell {index} ({value:.3e})")
        self.field = field_name
        self.index = index
        self.value = value


class DtUnderflow(RuntimeError):
    pass


@dataclass(frozen=True)
class StepControls:
    cfl: float = 0.4
    dt_min: float = 1e-9
    dt_max: float = 1e-2
    max_retries: int = 8
    t_final: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")

    @classmethod
    def fixed(cls, dt: float, t_final: float, max_retries: int = 8) -> "StepControls":
        return cls(cfl=1.0, dt_min=dt, dt_max=dt, max_retries=max_retries, t_final=t_final)


@dataclass(frozen=True)
class Forcing:
    """Additive source terms, already sampled on the grid at the new time level."""

    v: np.ndarray
    u: np.ndarray
    w: np.ndarray
    b: np.ndarray
    theta: np.ndarray


def _log_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Logarithmic mean of positive arrays; exact step integral of an exponential."""
    x = b / a - 1.0
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    ratio = np.where(small, 1.0 + x / 2.0 - x * x / 12.0, safe / np.log1p(safe))
    return a * ratio


@dataclass
class Accumulators:
    """Running time integrals along a committed trajectory.

    ``yint`` and ``vint`` use the trapezoid rule. ``rint`` integrates a
    strictly positive per-cell integrand that grows like ``exp(yint)``; it uses
    the logarithmic mean of the end values, which is second-order in general
    and exact for exponential time dependence.
    """

    yint: float
    vint: float
    rint: np.ndarray
    u0_cum: np.ndarray
    u0_moment: float
    t: float
    _rates: dict = field(repr=False)
    _terms: Optional[RepresentationTerms] = field(default=None, repr=False)

    @classmethod
    def start(cls, state: State, params: Parameters) -> "Accumulators":
        terms = RepresentationTerms(state, params) if params.is_normalized else None
        acc = cls(
            yint=0.0,
            vint=0.0,
            rint=np.zeros(state.n_cells),
            u0_cum=terms.U0 if terms else np.zeros(state.n_cells),
            u0_moment=terms.U0_moment if terms else 0.0,
            t=state.t,
            _rates={},
            _terms=terms,
        )
        acc._rates = acc._evaluate(state, params, yint=0.0)
        return acc

    @property
    def tracks_representation(self) -> bool:
        return self._terms is not None

    @property
    def terms(self) -> Optional[RepresentationTerms]:
        return self._terms

    def _evaluate(self, state: State, params: Parameters, yint: float) -> dict:
        rates = {"y": y_rate(state), "V": dissipation_rate(state, params)}
        if self._terms is not None:
            rates["r"] = self._terms.bracket_rate(state, yint)
        return rates

    def update(self, state: State, params: Parameters) -> None:
        dt = state.t - self.t
        old = self._rates
        y_new = y_rate(state)
        self.yint += 0.5 * dt * (old["y"] + y_new)
        new = self._evaluate(state, params, self.yint)
        self.vint += 0.5 * dt * (old["V"] + new["V"])
        if self._terms is not None:
            self.rint = self.rint + dt * _log_mean(old["r"], new["r"])
        self._rates = new
        self.t = state.t


def wave_speed(state: State, params: Parameters) -> np.ndarray:
    """Fast magnetoacoustic speed in mass coordinates, per cell."""
    v = state.v
    p = params.R * state.theta / v
    return np.sqrt(params.gamma * p * v + v * np.sum(state.b**2, axis=1)) / v


def stable_dt(state: State, controls: StepControls, params: Parameters) -> float:
    smax = float(np.max(wave_speed(state, params)))
    dt = controls.cfl * state.grid.dx / smax if smax > 0 else math.inf
    return min(max(dt, controls.dt_min), controls.dt_max)


def _diffusion_bands(coef: np.ndarray, scale: float, n: int):
    """Bands of ``-scale * delta(coef delta .)`` for ``n`` unknowns.

    ``coef`` holds the ``n + 1`` face coefficients around the unknowns.
    """
    lower = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = -scale * coef[1:n]
    upper[:-1] = -scale * coef[1:n]
    diag = scale * (coef[:-1] + coef[1:])
    return lower, diag, upper


def _check_positive(name: str, arr: np.ndarray) -> None:
    bad = np.flatnonzero(~(arr > 0))
    if bad.size:
        i = int(bad[0])
        raise PositivityFailure(name, i, float(arr[i]))


def step(
    state: State,
    dt: float,
    params: Parameters,
    forcing: Forcing | None = None,
    magnetic: bool = True,
) -> State:
    """Advance one step of size ``dt``.

    With ``magnetic=False`` the ``w`` and ``b`` solves are skipped and the
    fields are carried unchanged, which for zero data is the pure
    compressible Navier-Stokes scheme.

    Raises ``PositivityFailure`` if ``v`` or ``theta`` would become
    nonpositive; no values are clipped.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    g: Grid = state.grid
    n, dx = g.n_cells, g.dx
    r = dt / dx**2
    v, th, b = state.v, state.theta, state.b

    # (a) momentum: implicit viscous term, explicit total pressure
    total_p = params.R * th / v + 0.5 * np.sum(b**2, axis=1)
    visc = viscosity(v, params) / v
    lower, diag, upper = _diffusion_bands(visc, r, n - 1)
    rhs = state.u[1:-1] - dt * np.diff(total_p) / dx
    if forcing is not None:
        rhs = rhs + dt * forcing.u[1:-1]
    u_new = np.zeros(n + 1)
    u_new[1:-1] = solve_tridiagonal(lower, 1.0 + diag, upper, rhs)

    # (b) specific volume, conservative
    ux = np.diff(u_new) / dx
    rate_v = ux if forcing is None else ux + forcing.v
    v_new = v + dt * rate_v
    _check_positive("v", v_new)

    vn_new = g.interp_center_to_node(v_new)
    if magnetic:
        # (c) transverse velocity
        lower, diag, upper = _diffusion_bands(params.lambda_w / v_new, r, n - 1)
        rhs = state.w[1:-1] + dt * np.diff(b, axis=0) / dx
        if forcing is not None:
            rhs = rhs + dt * forcing.w[1:-1]
        w_new = np.zeros((n + 1, 2))
        w_new[1:-1] = solve_tridiagonal(lower, 1.0 + diag, upper, rhs)

        # (d) magnetic field in the conserved variable v b; Dirichlet ghosts
        kb = params.nu_b / vn_new
        lower, diag, upper = _diffusion_bands(kb, r, n)
        diag[0] += r * kb[0]
        diag[-1] += r * kb[-1]
        rhs = v[:, None] * b + dt * np.diff(w_new, axis=0) / dx
        if forcing is not None:
            rhs = rhs + dt * forcing.b
        b_new = solve_tridiagonal(lower, v_new + diag, upper, rhs)
    else:
        w_new = state.w
        b_new = state.b

    # (e) temperature: implicit conduction (lagged kappa) and compression work
    wx = np.diff(w_new, axis=0) / dx
    bx = g.ddx_center_to_node(b_new, B_CLOSURE, B_CLOSURE)
    heat = (viscosity(v_new, params) * ux**2 + params.lambda_w * np.sum(wx**2, axis=1)) / v_new
    heat = heat + g.node_to_center_mean(params.nu_b * np.sum(bx**2, axis=1) / vn_new)
    kappa = np.zeros(n + 1)
    kappa[1:-1] = conductivity(g.interp_center_to_node(th)[1:-1], params) / vn_new[1:-1]
    lower, diag, upper = _diffusion_bands(kappa, r, n)
    diag = diag + params.c_v + dt * params.R * ux / v_new
    rhs = params.c_v * th + dt * heat
    if forcing is not None:
        rhs = rhs + dt * forcing.theta
    th_new = solve_tridiagonal(lower, diag, upper, rhs)
    _check_positive("theta", th_new)

    return State(t=state.t + dt, v=v_new, u=u_new, w=w_new, b=b_new, theta=th_new)


@dataclass
class AdvanceResult:
    state: State
    accumulators: Accumulators
    steps: int = 0
    retries: int = 0
    retry_events: list = field(default_factory=list)


Observer = Callable[[State, Accumulators, int], None]


def advance(
    state: State,
    controls: StepControls,
    params: Parameters,
    observers: Iterable[Observer] = (),
    *,
    accumulators: Accumulators | None = None,
    forcing_fn: Callable[[float], Forcing] | None = None,
    magnetic: bool = True,
    stepper: Callable[..., State] = step,
) -> AdvanceResult:
    """Integrate from ``state.t`` to ``controls.t_final``.

    Each observer is called as ``observer(state, accumulators, step_count)``
    after every committed step. A step that fails positivity is retried with
    half the time step.
    """
    if not controls.t_final > state.t:
        raise ValueError("t_final must exceed the initial time")
    observers = list(observers)
    acc = accumulators if accumulators is not None else Accumulators.start(state, params)
    result = AdvanceResult(state=state, accumulators=acc)
    t_final = controls.t_final
    # steps within this fraction of a step from t_final land on it exactly
    snap = 1e-9

    while result.state.t < t_final:
        cur = result.state
        dt = stable_dt(cur, controls, params)
        remaining = t_final - cur.t
        if dt >= remaining * (1.0 - snap):
            dt = remaining
        attempts = 0
        while True:
            forcing = forcing_fn(cur.t + dt) if forcing_fn is not None else None
            try:
                new = stepper(cur, dt, params, forcing=forcing, magnetic=magnetic)
                break
            except PositivityFailure as exc:
                attempts += 1
                result.retries += 1
                result.retry_events.append({"t": cur.t, "dt": dt, "field": exc.field, "index": exc.index})
                logger.debug("positivity retry at t=%.6g dt=%.3g: %s", cur.t, dt, exc)
                dt *= 0.5
                if attempts > controls.max_retries or dt < controls.dt_min:
                    raise DtUnderflow(
                        f"positivity not recovered at t={cur.t:.6g} after {attempts} halvings (dt={dt:.3e})"
                    ) from exc
        if dt == remaining:
            new = new.replace(t=t_final)
        result.state = new
        result.steps += 1
        acc.update(new, params)
        for obs in observers:
            obs(new, acc, result.steps)
    return result
