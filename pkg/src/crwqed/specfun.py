"""Integer-order Bessel functions of the first kind.

The memory kernels of the waveguide dynamics are built entirely from
J_n(2 xi tau), so this module provides exactly that: J_n for integer n at
non-negative real arguments, as scalars, single rows J_0..J_max, and
vectorized tables over many arguments.

Everything is computed with Miller's downward recurrence normalized by the
sum rule J_0(x) + 2 sum_{k>=1} J_2k(x) = 1.  The recurrence is started far
enough above max(n, x) that the seed contamination is below double
precision; measured accuracy is ~1e-14 relative for n <= 64 up to x ~ 2000,
which covers desk-scale simulations (x = 2*xi*t_max <~ 2000) without a
separate asymptotic branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Renormalize when the unscaled recurrence exceeds this magnitude.
_RESCALE_AT = 1e250
_RESCALE_BY = 1e-250
# Below this argument the recurrence ratio 2m/x outruns the rescaling;
# the power series is exact to machine precision there in a few terms.
_SERIES_BELOW = 0.01


def _start_order(order_max: int, x_max: float) -> int:
    """Downward-recurrence start index; even, comfortably above the turning
    point so the arbitrary seed has decayed below 1e-16 by order_max."""
    base = max(order_max, int(np.ceil(x_max)))
    m = base + 50 + int(np.ceil(12.0 * base ** (1.0 / 3.0)))
    return m + (m % 2)


def _series_rows(order_max: int, xs: np.ndarray) -> np.ndarray:
    """Power-series rows for small arguments; leading factors built
    iteratively so high orders underflow to zero instead of overflowing."""
    half = xs / 2.0
    half_sq = half * half
    lead = np.ones_like(xs)
    rows = np.zeros((xs.shape[0], order_max + 1))
    for n in range(order_max + 1):
        if n > 0:
            lead = lead * half / n
        term = lead.copy()
        acc = lead.copy()
        for k in range(1, 40):
            term = -term * half_sq / (k * (k + n))
            prev = acc.copy()
            acc += term
            if np.array_equal(acc, prev):
                break
        rows[:, n] = acc
    return rows


def _miller_rows(order_max: int, xs: np.ndarray) -> np.ndarray:
    """Rows J_0(x)..J_order_max(x) for every x in xs (all x > 0)."""
    n_x = xs.shape[0]
    m_start = _start_order(order_max, float(xs.max()))
    j_above = np.zeros(n_x)
    j_here = np.full(n_x, 1e-30)
    even_sum = np.zeros(n_x)
    rows = np.zeros((n_x, order_max + 1))
    for m in range(m_start, 0, -1):
        j_below = (2.0 * m / xs) * j_here - j_above
        j_above = j_here
        j_here = j_below
        big = np.abs(j_here) > _RESCALE_AT
        if big.any():
            j_here[big] *= _RESCALE_BY
            j_above[big] *= _RESCALE_BY
            even_sum[big] *= _RESCALE_BY
            rows[big] *= _RESCALE_BY
        if m - 1 <= order_max:
            rows[:, m - 1] = j_here
        if (m - 1) > 0 and (m - 1) % 2 == 0:
            even_sum += 2.0 * j_here
    rows /= (j_here + even_sum)[:, None]
    return rows


def bessel_j_table(order_max: int, xs, chunk: int = 4096) -> np.ndarray:
    """J_n(x) for n = 0..order_max over an array of arguments.

    Parameters
    ----------
    order_max : int
        Highest order, >= 0.
    xs : array_like
        Non-negative arguments.
    chunk : int
        Arguments are processed in chunks so early (small-x) entries of a
        long kernel table do not pay the recurrence depth of the largest x.

    Returns
    -------
    (len(xs), order_max + 1) ndarray.
    """
    if order_max < 0:
        raise ValueError(f"order_max must be >= 0, got {order_max}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.ndim != 1:
        raise ValueError("xs must be one-dimensional")
    if (xs < 0.0).any():
        raise ValueError("negative argument: J_n is evaluated for x >= 0 only")
    out = np.zeros((xs.shape[0], order_max + 1))
    out[xs == 0.0, 0] = 1.0  # J_0(0) = 1, J_{n>=1}(0) = 0
    small = np.flatnonzero((xs > 0.0) & (xs < _SERIES_BELOW))
    if small.size:
        out[small] = _series_rows(order_max, xs[small])
    nz = np.flatnonzero(xs >= _SERIES_BELOW)
    for s in range(0, nz.size, chunk):
        idx = nz[s:s + chunk]
        out[idx] = _miller_rows(order_max, xs[idx])
    return out


@dataclass(frozen=True)
class BesselRow:
    """J_0(x)..J_order_max(x) at a fixed argument."""

    order_max: int
    x: float
    values: np.ndarray

    def sum_rule_residual(self) -> float:
        """|J_0^2 + 2 sum_{n>=1} J_n^2 - 1|; tends to 0 as order_max grows
        past x + 20."""
        v = self.values
        return abs(v[0] ** 2 + 2.0 * np.sum(v[1:] ** 2) - 1.0)


def bessel_j_row(order_max: int, x: float) -> BesselRow:
    """All orders 0..order_max at a single argument."""
    values = bessel_j_table(order_max, [x])[0]
    return BesselRow(order_max=order_max, x=float(x), values=values)


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer n (may be negative) and x >= 0.

    Negative orders use the parity identity J_{-n}(x) = (-1)^n J_n(x).
    """
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    return sign * float(bessel_j_table(n, [x])[0, n])
