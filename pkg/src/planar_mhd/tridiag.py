"""Thomas elimination for tridiagonal systems with a pivot guard."""

from __future__ import annotations

import numpy as np

PIVOT_RTOL = 1e-14


class SingularSystem(ArithmeticError):
    """Elimination met a pivot that is negligible against its row scale."""

    def __init__(self, row: int, pivot: float, scale: float):
        super().__init__(f"pivot {pivot:.3e} at row {row} below {PIVOT_RTOL:g} x row scale {scale:.3e}")
        self.row = row
        self.pivot = pivot
        self.scale = scale


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve ``A x = rhs`` for tridiagonal ``A``.

    Parameters
    ----------
    lower : array_like, length n
        Sub-diagonal; ``lower[0]`` is ignored.
    diag : array_like, length n
        Main diagonal.
    upper : array_like, length n
        Super-diagonal; ``upper[n-1]`` is ignored.
    rhs : array_like, shape (n,) or (n, k)
        One or more right-hand sides sharing the matrix.

    Returns
    -------
    ndarray with the shape of ``rhs``.

    Raises
    ------
    SingularSystem
        If a pivot falls below ``PIVOT_RTOL`` times the largest magnitude in
        the original row.
    """
    lo = np.asarray(lower, dtype=float)
    b_arr = np.asarray(diag, dtype=float)
    up = np.asarray(upper, dtype=float)
    d = np.asarray(rhs, dtype=float)
    n = b_arr.shape[0]
    if not (lo.shape[0] == up.shape[0] == n == d.shape[0]):
        raise ValueError("tridiagonal bands and rhs must share the leading length")
    if n == 0:
        return d.copy()
    lo = lo.copy()
    up = up.copy()
    lo[0] = 0.0
    up[-1] = 0.0
    floor = (PIVOT_RTOL * np.maximum(np.maximum(np.abs(lo), np.abs(b_arr)), np.abs(up))).tolist()
    a, b, c = lo.tolist(), b_arr.tolist(), up.tolist()
    columns = d.reshape(n, -1).T.tolist()

    # Forward sweep on the matrix; multipliers are reused for every rhs column.
    mult = [0.0] * n
    piv = [0.0] * n
    p = b[0]
    for k in range(n):
        if k:
            m = a[k] / p
            mult[k] = m
            p = b[k] - m * c[k - 1]
        if not abs(p) > floor[k]:
            raise SingularSystem(k, p, floor[k] / PIVOT_RTOL)
        piv[k] = p

    out = np.empty((len(columns), n))
    for col_idx, y in enumerate(columns):
        for k in range(1, n):
            y[k] -= mult[k] * y[k - 1]
        x = y
        x[n - 1] = y[n - 1] / piv[n - 1]
        for k in range(n - 2, -1, -1):
            x[k] = (y[k] - c[k] * x[k + 1]) / piv[k]
        out[col_idx] = x
    return out.T.reshape(d.shape)
