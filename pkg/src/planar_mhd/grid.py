"""Staggered grid on the unit mass interval.

Velocities ``u`` and ``w`` live on the ``n_cells + 1`` nodes ``x_j = j dx``;
``v``, ``theta`` and ``b`` live on the cell centers ``x_i = (i + 1/2) dx``.
Boundary closures for center fields use one ghost cell per side:

* ``DIRICHLET`` (used for ``b``): ghost = -edge value, so the field vanishes
  on the boundary node.
* ``ZERO_FLUX`` (used for ``theta``): ghost = edge value, so the one-sided
  gradient on the boundary node is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .core import DomainError

DIRICHLET = "dirichlet"
ZERO_FLUX = "zero_flux"
B_CLOSURE = DIRICHLET
THETA_CLOSURE = ZERO_FLUX

MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    n_cells: int

    def __post_init__(self) -> None:
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ValueError(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.dx

    def _check(self, arr, length: int, what: str) -> np.ndarray:
        arr = np.asarray(arr, dtype=float)
        if arr.shape[0] != length:
            raise ValueError(f"{what} field has length {arr.shape[0]}, expected {length}")
        return arr

    def ddx_node_to_center(self, f) -> np.ndarray:
        """``(f[j+1] - f[j]) / dx`` on every cell."""
        f = self._check(f, self.n_cells + 1, "node")
        return np.diff(f, axis=0) / self.dx

    def ddx_center_to_node(self, g, left_bc: str = ZERO_FLUX, right_bc: str = ZERO_FLUX) -> np.ndarray:
        """Node gradient of a center field, boundary nodes closed by a ghost cell."""
        g = self._check(g, self.n_cells, "center")
        ghost_l = _ghost(g[0], left_bc)
        ghost_r = _ghost(g[-1], right_bc)
        ext = np.concatenate([ghost_l[None], g, ghost_r[None]], axis=0)
        return np.diff(ext, axis=0) / self.dx

    def interp_center_to_node(self, g) -> np.ndarray:
        """Arithmetic mean at interior nodes, edge copy at the boundary nodes."""
        g = self._check(g, self.n_cells, "center")
        out = np.empty((self.n_cells + 1,) + g.shape[1:])
        out[1:-1] = 0.5 * (g[:-1] + g[1:])
        out[0] = g[0]
        out[-1] = g[-1]
        return out

    def node_to_center_sq(self, f) -> np.ndarray:
        """Mean of squared node values (summed over components) on each cell."""
        f = self._check(f, self.n_cells + 1, "node")
        sq = f**2 if f.ndim == 1 else np.sum(f**2, axis=1)
        return 0.5 * (sq[:-1] + sq[1:])

    def node_to_center_mean(self, q) -> np.ndarray:
        q = self._check(q, self.n_cells + 1, "node")
        return 0.5 * (q[:-1] + q[1:])

    def integrate_centers(self, g) -> float:
        """Midpoint quadrature of a center field over (0, 1)."""
        return float(np.sum(self._check(g, self.n_cells, "center")) * self.dx)


def _ghost(edge, closure: str):
    if closure == DIRICHLET:
        return -np.asarray(edge)
    if closure == ZERO_FLUX:
        return np.asarray(edge)
    raise ValueError(f"unknown boundary closure {closure!r}")


def _vec2(arr, length: int, name: str) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    if arr.ndim == 1:
        raise ValueError(f"{name} must have shape ({length}, 2)")
    if arr.shape != (length, 2):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({length}, 2)")
    return arr


@dataclass(frozen=True, eq=False)
class State:
    """Discrete fields at one time level.

    ``w`` has shape ``(n_cells + 1, 2)`` and ``b`` has shape ``(n_cells, 2)``.
    Constructing a state with a nonpositive ``v`` or ``theta`` raises.
    """

    t: float
    v: np.ndarray
    u: np.ndarray
    w: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    grid: Grid = field(init=False, repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.v, dtype=float)
        n = v.shape[0]
        object.__setattr__(self, "grid", Grid(n))
        theta = np.array(self.theta, dtype=float)
        u = np.array(self.u, dtype=float)
        if v.shape != (n,) or theta.shape != (n,):
            raise ValueError("v and theta must be 1-d center fields of equal length")
        if u.shape != (n + 1,):
            raise ValueError(f"u has shape {u.shape}, expected ({n + 1},)")
        w = _vec2(self.w, n + 1, "w")
        b = _vec2(self.b, n, "b")
        if not np.all(v > 0):
            raise DomainError(f"specific volume must be positive (min {v.min():.3e})")
        if not np.all(theta > 0):
            raise DomainError(f"temperature must be positive (min {theta.min():.3e})")
        for name, arr in (("v", v), ("u", u), ("w", w), ("b", b), ("theta", theta)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    def replace(self, **changes) -> "State":
        return replace(self, **changes)

    def fields(self) -> dict[str, np.ndarray]:
        return {"v": self.v, "u": self.u, "w": self.w, "b": self.b, "theta": self.theta}

    def max_deviation(self, other: "State") -> float:
        """Largest absolute difference over all fields."""
        return max(float(np.max(np.abs(a - other.fields()[k]))) for k, a in self.fields().items())

    @classmethod
    def from_functions(cls, n_cells: int, v0, u0, w0, b0, theta0, t: float = 0.0) -> "State":
        """Sample closed-form profiles (callables of x) onto the grid.

        ``w0`` and ``b0`` return a pair of arrays.
        """
        g = Grid(n_cells)
        xc, xn = g.centers, g.nodes
        return cls(
            t=t,
            v=np.asarray(v0(xc), dtype=float) * np.ones_like(xc),
            u=np.asarray(u0(xn), dtype=float) * np.ones_like(xn),
            w=np.column_stack([np.broadcast_to(c, xn.shape) for c in w0(xn)]),
            b=np.column_stack([np.broadcast_to(c, xc.shape) for c in b0(xc)]),
            theta=np.asarray(theta0(xc), dtype=float) * np.ones_like(xc),
        )

    @classmethod
    def rest(cls, n_cells: int, v: float = 1.0, theta: float = 1.0) -> "State":
        return cls(
            t=0.0,
            v=np.full(n_cells, float(v)),
            u=np.zeros(n_cells + 1),
            w=np.zeros((n_cells + 1, 2)),
            b=np.zeros((n_cells, 2)),
            theta=np.full(n_cells, float(theta)),
        )


def apply_boundary(state: State) -> State:
    """Zero ``u`` and ``w`` on both boundary nodes.

    ``b`` and ``theta`` need no adjustment: their boundary conditions are
    imposed through the ghost closures ``B_CLOSURE`` and ``THETA_CLOSURE``.
    """
    if state.u[0] == 0 and state.u[-1] == 0 and not np.any(state.w[[0, -1]]):
        return state
    u = state.u.copy()
    w = state.w.copy()
    u[[0, -1]] = 0.0
    w[[0, -1]] = 0.0
    return state.replace(u=u, w=w)
