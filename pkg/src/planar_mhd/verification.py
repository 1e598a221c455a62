"""Independent correctness checks for the integrator.

``oracle_step`` is a forward-Euler discretization on the same staggered grid
that shares only the difference operators with the semi-implicit scheme.
The manufactured-solution harness derives source terms symbolically with
sympy from closed-form targets and measures observed convergence orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from .core import Parameters, conductivity, viscosity
from .grid import B_CLOSURE, THETA_CLOSURE, Grid, State
from .integrator import Forcing, PositivityFailure, StepControls, advance, step

SCALAR_FIELDS = ("v", "u", "w1", "w2", "b1", "b2", "theta")


def oracle_step(
    state: State,
    dt: float,
    params: Parameters,
    forcing: Forcing | None = None,
    magnetic: bool = True,
) -> State:
    """One fully explicit step; every right-hand side uses the old fields.

    Stable only for ``dt`` of order ``dx**2``; the caller is responsible.
    """
    g = state.grid
    v, u, w, b, th = state.v, state.u, state.w, state.b, state.theta
    vn = g.interp_center_to_node(v)
    thn = g.interp_center_to_node(th)
    ux = g.ddx_node_to_center(u)
    wx = g.ddx_node_to_center(w)
    bx = g.ddx_center_to_node(b, B_CLOSURE, B_CLOSURE)
    thx = g.ddx_center_to_node(th, THETA_CLOSURE, THETA_CLOSURE)

    stress = viscosity(v, params) * ux / v - params.R * th / v - 0.5 * np.sum(b**2, axis=1)
    u_rate = np.zeros_like(u)
    u_rate[1:-1] = np.diff(stress) / g.dx
    v_rate = ux.copy()

    w_rate = np.zeros_like(w)
    m_rate = np.zeros_like(b)
    if magnetic:
        w_flux = b + params.lambda_w * wx / v[:, None]
        w_rate[1:-1] = np.diff(w_flux, axis=0) / g.dx
        m_rate = wx + g.ddx_node_to_center(params.nu_b * bx / vn[:, None])

    heat = (viscosity(v, params) * ux**2 + params.lambda_w * np.sum(wx**2, axis=1)) / v
    heat = heat + g.node_to_center_mean(params.nu_b * np.sum(bx**2, axis=1) / vn)
    q = conductivity(thn, params) * thx / vn
    th_rate = (g.ddx_node_to_center(q) - params.R * th * ux / v + heat) / params.c_v

    if forcing is not None:
        u_rate[1:-1] += forcing.u[1:-1]
        v_rate += forcing.v
        w_rate[1:-1] += forcing.w[1:-1]
        m_rate += forcing.b
        th_rate += forcing.theta / params.c_v

    v_new = v + dt * v_rate
    th_new = th + dt * th_rate
    for name, arr in (("v", v_new), ("theta", th_new)):
        bad = np.flatnonzero(~(arr > 0))
        if bad.size:
            raise PositivityFailure(name, int(bad[0]), float(arr[bad[0]]))
    b_new = (v[:, None] * b + dt * m_rate) / v_new[:, None] if magnetic else b
    return State(t=state.t + dt, v=v_new, u=u + dt * u_rate, w=w + dt * w_rate, b=b_new, theta=th_new)


def _record(states: list):
    def obs(s, acc, k):
        states.append(s)
    return obs


def oracle_equivalence(
    initial: State, params: Parameters, dts: Sequence[float], t_final: float
) -> list[float]:
    """Sup-norm gap between semi-implicit and explicit trajectories, per ``dt``.

    Both trajectories take the same fixed steps; the gap is the largest field
    deviation over all shared step times.
    """
    gaps = []
    for dt in dts:
        controls = StepControls.fixed(dt, initial.t + t_final)
        implicit, explicit = [], []
        advance(initial, controls, params, [_record(implicit)], stepper=step)
        advance(initial, controls, params, [_record(explicit)], stepper=oracle_step)
        gaps.append(max(a.max_deviation(e) for a, e in zip(implicit, explicit)))
    return gaps


# --- manufactured solutions -------------------------------------------------

_x, _t = sp.symbols("x t", real=True)
X, T = _x, _t
_E = sp.exp(-_t)
_PI = sp.pi

DEFAULT_TARGETS = {
    "v": 1 + sp.Rational(1, 5) * _E * sp.cos(_PI * _x),
    "u": sp.Rational(3, 10) * _E * sp.sin(_PI * _x),
    "w1": sp.Rational(1, 5) * _E * sp.sin(2 * _PI * _x),
    "w2": sp.Rational(1, 10) * _E * sp.sin(_PI * _x),
    "b1": sp.Rational(3, 10) * _E * sp.sin(_PI * _x),
    "b2": sp.Rational(1, 5) * _E * sp.sin(2 * _PI * _x),
    "theta": 1 + sp.Rational(3, 10) * _E * sp.cos(_PI * _x),
}

HEAT_TARGETS = {
    "v": sp.Integer(1),
    "u": sp.Integer(0),
    "w1": sp.Integer(0),
    "w2": sp.Integer(0),
    "b1": sp.Integer(0),
    "b2": sp.Integer(0),
    "theta": 1 + sp.Rational(1, 2) * _E * sp.cos(_PI * _x),
}

CONSTANT_TARGETS = {
    "v": sp.Integer(1), "u": sp.Integer(0), "w1": sp.Integer(0), "w2": sp.Integer(0),
    "b1": sp.Integer(0), "b2": sp.Integer(0), "theta": sp.Integer(1),
}


def _sources(targets: dict, params: Parameters) -> dict:
    """Residuals of the governing equations evaluated on the targets."""
    v, u, th = targets["v"], targets["u"], targets["theta"]
    w = [targets["w1"], targets["w2"]]
    b = [targets["b1"], targets["b2"]]
    R, cv = params.R, params.c_v
    lam, nu = params.lambda_w, params.nu_b
    mu = params.mu1 + params.mu2 * v ** (-sp.nsimplify(params.alpha))
    kappa = params.kappa0 * th ** sp.nsimplify(params.beta)
    dx = lambda f: sp.diff(f, _x)  # noqa: E731
    dt = lambda f: sp.diff(f, _t)  # noqa: E731
    bsq = b[0] ** 2 + b[1] ** 2
    src = {
        "v": dt(v) - dx(u),
        "u": dt(u) + dx(R * th / v + bsq / 2) - dx(mu * dx(u) / v),
        "theta": cv * dt(th) + R * th * dx(u) / v - dx(kappa * dx(th) / v)
        - (mu * dx(u) ** 2 + lam * (dx(w[0]) ** 2 + dx(w[1]) ** 2) + nu * (dx(b[0]) ** 2 + dx(b[1]) ** 2)) / v,
    }
    for k in range(2):
        src[f"w{k + 1}"] = dt(w[k]) - dx(b[k]) - dx(lam * dx(w[k]) / v)
        src[f"b{k + 1}"] = dt(v * b[k]) - dx(w[k]) - dx(nu * dx(b[k]) / v)
    return src


def _lambdify(expr) -> Callable:
    fn = sp.lambdify((_x, _t), expr, modules="numpy")
    return lambda x, t: np.broadcast_to(np.asarray(fn(x, t), dtype=float), np.shape(x))


@dataclass
class ManufacturedCase:
    """Closed-form targets plus the sources that make them exact solutions."""

    name: str
    targets: dict
    params: Parameters
    _target_fns: dict = field(init=False, repr=False)
    _source_fns: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        missing = set(SCALAR_FIELDS) - set(self.targets)
        if missing:
            raise ValueError(f"manufactured case lacks targets for {sorted(missing)}")
        self.targets = {k: sp.sympify(self.targets[k]) for k in SCALAR_FIELDS}
        self._check_compatibility()
        self._target_fns = {k: _lambdify(e) for k, e in self.targets.items()}
        self._source_fns = {k: _lambdify(e) for k, e in _sources(self.targets, self.params).items()}

    def _check_compatibility(self) -> None:
        for k, expr in self.targets.items():
            extra = expr.free_symbols - {_x, _t}
            if extra:
                raise ValueError(f"target {k} has free symbols {sorted(map(str, extra))}; use x and t only")
        for k in ("u", "w1", "w2", "b1", "b2"):
            for end in (0, 1):
                if sp.simplify(self.targets[k].subs(_x, end)) != 0:
                    raise ValueError(f"target {k} must vanish at x={end}")
        dth = sp.diff(self.targets["theta"], _x)
        for end in (0, 1):
            if sp.simplify(dth.subs(_x, end)) != 0:
                raise ValueError(f"target theta must have zero slope at x={end}")

    def header(self) -> str:
        return "; ".join(f"{k}* = {sp.sstr(self.targets[k])}" for k in SCALAR_FIELDS)

    def target(self, name: str, x, t: float) -> np.ndarray:
        return self._target_fns[name](x, t)

    def source(self, name: str, x, t: float) -> np.ndarray:
        return self._source_fns[name](x, t)

    def exact_state(self, grid: Grid, t: float) -> State:
        xc, xn = grid.centers, grid.nodes
        f = lambda k, x: self.target(k, x, t)  # noqa: E731
        return State(
            t=t,
            v=f("v", xc),
            u=f("u", xn),
            w=np.column_stack([f("w1", xn), f("w2", xn)]),
            b=np.column_stack([f("b1", xc), f("b2", xc)]),
            theta=f("theta", xc),
        )

    def forcing(self, grid: Grid, t: float) -> Forcing:
        xc, xn = grid.centers, grid.nodes
        s = lambda k, x: self.source(k, x, t)  # noqa: E731
        return Forcing(
            v=s("v", xc),
            u=s("u", xn),
            w=np.column_stack([s("w1", xn), s("w2", xn)]),
            b=np.column_stack([s("b1", xc), s("b2", xc)]),
            theta=s("theta", xc),
        )


@lru_cache(maxsize=None)
def _cached_case(kind: str, params: Parameters) -> ManufacturedCase:
    targets = {"default": DEFAULT_TARGETS, "heat": HEAT_TARGETS, "constant": CONSTANT_TARGETS}[kind]
    return ManufacturedCase(kind, targets, params)


def default_case(params: Parameters | None = None) -> ManufacturedCase:
    return _cached_case("default", params or Parameters.paper_normalized(1.0, 1.0))


def heat_case(params: Parameters | None = None) -> ManufacturedCase:
    return _cached_case("heat", params or Parameters.paper_normalized(1.0, 1.0))


def constant_case(params: Parameters | None = None) -> ManufacturedCase:
    return _cached_case("constant", params or Parameters.paper_normalized(1.0, 1.0))


def l2_errors(state: State, exact: State) -> dict[str, float]:
    dx = state.grid.dx
    pairs = {
        "v": (state.v, exact.v),
        "u": (state.u, exact.u),
        "w1": (state.w[:, 0], exact.w[:, 0]),
        "w2": (state.w[:, 1], exact.w[:, 1]),
        "b1": (state.b[:, 0], exact.b[:, 0]),
        "b2": (state.b[:, 1], exact.b[:, 1]),
        "theta": (state.theta, exact.theta),
    }
    return {k: math.sqrt(float(np.sum((a - e) ** 2)) * dx) for k, (a, e) in pairs.items()}


def fit_order(dxs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(dx); NaN if any error is zero."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return math.nan
    slope, _ = np.polyfit(np.log(np.asarray(dxs, dtype=float)), np.log(errors), 1)
    return float(slope)


@dataclass(frozen=True)
class ConvergenceReport:
    case: str
    header: str
    mode: str
    levels: tuple
    dts: tuple
    errors: dict
    orders: dict

    def min_order(self, fields: Sequence[str] = SCALAR_FIELDS) -> float:
        return min(self.orders[k] for k in fields)

    def lines(self) -> list[str]:
        out = [f"# case {self.case} ({self.mode}): {self.header}"]
        out.append("n_cells,dt," + ",".join(SCALAR_FIELDS))
        for i, n in enumerate(self.levels):
            out.append(f"{n},{self.dts[i]!r}," + ",".join(repr(self.errors[k][i]) for k in SCALAR_FIELDS))
        out.append("order,," + ",".join(f"{self.orders[k]:.4f}" for k in SCALAR_FIELDS))
        return out


def run_mms(
    case: ManufacturedCase,
    levels: Sequence[int] = (16, 32, 64),
    mode: str = "space",
    t_final: float | None = None,
    dt_coef: float | None = None,
) -> ConvergenceReport:
    """Refinement study against a manufactured solution.

    ``mode="space"`` uses ``dt = dt_coef * dx**2`` so the time error is of the
    same order as the spatial one; ``mode="combined"`` uses ``dt = dt_coef * dx``.
    Defaults: ``t_final=0.1, dt_coef=0.5`` for space and ``t_final=0.5,
    dt_coef=0.25`` for combined; shorter combined horizons are pre-asymptotic.
    """
    if len(levels) < 3:
        raise ValueError("run_mms needs at least three levels")
    if mode not in ("space", "combined"):
        raise ValueError("mode must be 'space' or 'combined'")
    if dt_coef is None:
        dt_coef = 0.5 if mode == "space" else 0.25
    if t_final is None:
        t_final = 0.1 if mode == "space" else 0.5
    errors = {k: [] for k in SCALAR_FIELDS}
    dts = []
    for n in levels:
        grid = Grid(n)
        dx = grid.dx
        dt = dt_coef * (dx**2 if mode == "space" else dx)
        n_steps = max(1, math.ceil(t_final / dt - 1e-9))
        dt = t_final / n_steps
        dts.append(dt)
        initial = case.exact_state(grid, 0.0)
        result = advance(
            initial,
            StepControls.fixed(dt, t_final),
            case.params,
            forcing_fn=lambda t, grid=grid: case.forcing(grid, t),
        )
        errs = l2_errors(result.state, case.exact_state(grid, t_final))
        for k in SCALAR_FIELDS:
            errors[k].append(errs[k])
    dxs = [1.0 / n for n in levels]
    orders = {k: fit_order(dxs, errors[k]) for k in SCALAR_FIELDS}
    return ConvergenceReport(
        case=case.name, header=case.header(), mode=mode,
        levels=tuple(levels), dts=tuple(dts), errors=errors, orders=orders,
    )
