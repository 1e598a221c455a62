"""Functionals evaluated along computed trajectories.

Quadrature is midpoint over cells. Quantities that live on nodes (``u``,
``w``, and the node gradients of ``theta`` and ``b``) are averaged onto the
two adjacent cells before summation, so boundary nodes carry half weight.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .core import DomainError, Parameters, conductivity, f_alpha, viscosity
from .grid import B_CLOSURE, THETA_CLOSURE, State

if TYPE_CHECKING:
    from .integrator import Accumulators

H1_FIELDS = ("v", "u", "w", "b", "theta")


@dataclass(frozen=True)
class DiagnosticsSample:
    t: float
    mass: float
    total_energy: float
    e_paper: float
    e_balance: float
    V: float
    vint: float
    min_v: float
    max_v: float
    min_theta: float
    max_theta: float
    l1_v_neg_alpha: float
    h1_v: float
    h1_u: float
    h1_w: float
    h1_b: float
    h1_theta: float

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(cls.__dataclass_fields__)

    def as_row(self) -> list[float]:
        return [getattr(self, c) for c in self.columns()]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RepresentationReport:
    t: float
    B0: np.ndarray
    D: np.ndarray
    Y: float
    v_reconstructed: np.ndarray
    max_rel_err: float


def _check_state(state: State) -> None:
    if not (np.all(state.v > 0) and np.all(state.theta > 0)):
        raise DomainError("diagnostics require v > 0 and theta > 0")


def _node_means(state: State):
    g = state.grid
    return g.interp_center_to_node(state.v), g.interp_center_to_node(state.theta)


def dissipation_rate(state: State, params: Parameters) -> float:
    """Entropy dissipation rate V(t).

    Sum of ``kappa theta_x^2 / (v theta^2)`` and
    ``(mu u_x^2 + lambda |w_x|^2 + nu |b_x|^2) / (v theta)``.
    """
    _check_state(state)
    g = state.grid
    v, th = state.v, state.theta
    vn, thn = _node_means(state)

    ux = g.ddx_node_to_center(state.u)
    wx = g.ddx_node_to_center(state.w)
    center = (viscosity(v, params) * ux**2 + params.lambda_w * np.sum(wx**2, axis=1)) / (v * th)

    thx = g.ddx_center_to_node(th, THETA_CLOSURE, THETA_CLOSURE)
    bx = g.ddx_center_to_node(state.b, B_CLOSURE, B_CLOSURE)
    node = conductivity(thn, params) * thx**2 / (vn * thn**2)
    node = node + params.nu_b * np.sum(bx**2, axis=1) / (vn * thn)
    return g.integrate_centers(center + g.node_to_center_mean(node))


def y_rate(state: State) -> float:
    """Integrand of the time integral inside Y: int (u^2 + v|b|^2/2 + theta) dx."""
    g = state.grid
    dens = g.node_to_center_sq(state.u) + 0.5 * state.v * np.sum(state.b**2, axis=1) + state.theta
    return g.integrate_centers(dens)


def cumulative_u(state: State) -> np.ndarray:
    """Running integral of u from x=0 to each cell, with its first-moment term.

    Node trapezoid accumulation up to the node left of each cell plus the
    half-cell continuation ``u_j dx / 2``; algebraically ``dx * sum(u[1:i+1])``,
    which is the quantity whose time derivative the discrete momentum update
    telescopes to ``sigma_i - sigma_0``.
    """
    g = state.grid
    return np.concatenate([[0.0], np.cumsum(state.u[1:-1])]) * g.dx


def effective_stress(state: State, params: Parameters) -> np.ndarray:
    """``mu u_x / v - R theta / v - |b|^2 / 2`` on cells."""
    _check_state(state)
    ux = state.grid.ddx_node_to_center(state.u)
    v = state.v
    return viscosity(v, params) * ux / v - params.R * state.theta / v - 0.5 * np.sum(state.b**2, axis=1)


def _require_normalized(params: Parameters) -> None:
    if not params.is_normalized:
        raise ValueError(
            "the specific-volume representation needs R = 1, mu1 = 1 and mu2 = alpha; "
            "use Parameters.paper_normalized"
        )


def _f_int(v: np.ndarray, alpha: float, dx: float) -> float:
    return float(np.sum(f_alpha(v, alpha)) * dx)


class RepresentationTerms:
    """Time-independent pieces of the representation, frozen from the initial state."""

    def __init__(self, initial: State, params: Parameters):
        _require_normalized(params)
        _check_state(initial)
        self.alpha = params.alpha
        dx = initial.grid.dx
        v0 = initial.v
        self.U0 = cumulative_u(initial)
        self.U0_moment = float(np.sum(v0 * self.U0) * dx)
        self.B0 = v0 * np.exp(-(v0 ** (-self.alpha)) - _f_int(v0, self.alpha, dx))

    def D(self, state: State) -> np.ndarray:
        U = cumulative_u(state)
        moment = float(np.sum(state.v * U) * state.grid.dx)
        return np.exp(state.v ** (-self.alpha) + (U - self.U0) - moment + self.U0_moment)

    def Y(self, state: State, yint: float) -> float:
        return math.exp(_f_int(state.v, self.alpha, state.grid.dx) - yint)

    def bracket_rate(self, state: State, yint: float) -> np.ndarray:
        """Per-cell integrand ``(theta + v|b|^2/2) / (D Y)``."""
        g = state.theta + 0.5 * state.v * np.sum(state.b**2, axis=1)
        return g / (self.D(state) * self.Y(state, yint))


def representation_report(
    state: State, accumulators: "Accumulators", initial_state: State, params: Parameters
) -> RepresentationReport:
    """Rebuild v from the initial data, the current fields and the time integrals."""
    _check_state(state)
    terms = RepresentationTerms(initial_state, params)
    D = terms.D(state)
    Y = terms.Y(state, accumulators.yint)
    v_rec = D * Y * (terms.B0 + accumulators.rint)
    err = float(np.max(np.abs(state.v - v_rec) / state.v))
    return RepresentationReport(t=state.t, B0=terms.B0, D=D, Y=Y, v_reconstructed=v_rec, max_rel_err=err)


def h1_seminorms(state: State) -> dict[str, float]:
    g = state.grid
    dx = g.dx
    vx = np.diff(state.v) / dx
    thx = np.diff(state.theta) / dx
    ux = g.ddx_node_to_center(state.u)
    wx = g.ddx_node_to_center(state.w)
    bx2 = np.sum(g.ddx_center_to_node(state.b, B_CLOSURE, B_CLOSURE) ** 2, axis=1)
    return {
        "v": math.sqrt(np.sum(vx**2) * dx),
        "u": math.sqrt(np.sum(ux**2) * dx),
        "w": math.sqrt(np.sum(wx**2) * dx),
        "b": math.sqrt(g.integrate_centers(g.node_to_center_mean(bx2))),
        "theta": math.sqrt(np.sum(thx**2) * dx),
    }


def sample(state: State, accumulators: "Accumulators | None", params: Parameters) -> DiagnosticsSample:
    _check_state(state)
    g = state.grid
    v, th = state.v, state.theta
    u2 = g.node_to_center_sq(state.u)
    w2 = g.node_to_center_sq(state.w)
    vb2 = v * np.sum(state.b**2, axis=1)
    log_v, log_th = np.log(v), np.log(th)
    h1 = h1_seminorms(state)
    return DiagnosticsSample(
        t=state.t,
        mass=g.integrate_centers(v),
        total_energy=g.integrate_centers(params.c_v * th + 0.5 * (u2 + w2 + vb2)),
        e_paper=g.integrate_centers(u2 + w2 + vb2 + (v - log_v) + (th - log_th)),
        e_balance=g.integrate_centers(0.5 * (u2 + w2 + vb2) + (v - log_v - 1.0) + (th - log_th - 1.0)),
        V=dissipation_rate(state, params),
        vint=accumulators.vint if accumulators is not None else 0.0,
        min_v=float(v.min()),
        max_v=float(v.max()),
        min_theta=float(th.min()),
        max_theta=float(th.max()),
        l1_v_neg_alpha=g.integrate_centers(v ** (-params.alpha)),
        h1_v=h1["v"],
        h1_u=h1["u"],
        h1_w=h1["w"],
        h1_b=h1["b"],
        h1_theta=h1["theta"],
    )


@dataclass(frozen=True)
class BoundsReport:
    inf_min_v: float
    sup_max_v: float
    inf_min_theta: float
    sup_max_theta: float
    sup_l1_v_neg_alpha: float
    sup_entropy_plus_dissipation: float
    bounded: bool

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_monitor(samples: Sequence[DiagnosticsSample]) -> BoundsReport:
    """Extremes of the monitored quantities over a time series."""
    if len(samples) == 0:
        raise ValueError("bounds_monitor needs at least one sample")
    col = lambda name: np.array([getattr(s, name) for s in samples], dtype=float)  # noqa: E731
    values = dict(
        inf_min_v=float(col("min_v").min()),
        sup_max_v=float(col("max_v").max()),
        inf_min_theta=float(col("min_theta").min()),
        sup_max_theta=float(col("max_theta").max()),
        sup_l1_v_neg_alpha=float(col("l1_v_neg_alpha").max()),
        sup_entropy_plus_dissipation=float((col("e_paper") + col("vint")).max()),
    )
    bounded = all(math.isfinite(x) for x in values.values())
    bounded = bounded and values["inf_min_v"] > 0 and values["inf_min_theta"] > 0
    return BoundsReport(**values, bounded=bool(bounded))
