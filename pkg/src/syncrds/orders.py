"""The two partial orders on grid functions, intervals, and a normality probe.

``pointwise_leq`` compares nodal values directly.  ``dual_preceq`` compares
the inverse-Laplacian images instead, which makes order intervals much larger:
the probe below measures how much larger, by integrating the H1 seminorm of an
oscillatory function trapped inside a fixed interval.  The seminorm grows
linearly in the oscillation frequency while the interval endpoints stay put,
so interval diameter is not controlled by endpoint distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, lap_solve_array

__all__ = [
    "OrderRelation",
    "Interval",
    "ProbeResult",
    "leq",
    "interval_contains",
    "normality_probe",
    "closedness_check",
]

ORDER_KINDS = ("pointwise_leq", "dual_preceq")


@dataclass(frozen=True)
class OrderRelation:
    """A partial-order predicate with a comparison tolerance (nodal, absolute).

    The default tolerance 1e-10 sits two orders of magnitude above the 1e-12
    residuals of the linear and Newton solves, so honest order violations are
    surfaced while solver noise is not.
    """

    kind: str
    tol: float = 1e-10

    def __post_init__(self):
        if self.kind not in ORDER_KINDS:
            raise ValueError(f"unknown order kind {self.kind!r}")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")

    def representation(self, f: GridFunction) -> np.ndarray:
        """Nodal vector in which the order reduces to componentwise <=."""
        if self.kind == "pointwise_leq":
            return f.u
        return lap_solve_array(f.u, f.spec.h)


def leq(order: OrderRelation, x: GridFunction, y: GridFunction) -> bool:
    x.same_grid(y)
    rx = order.representation(x)
    ry = order.representation(y)
    return bool(np.all(rx <= ry + order.tol))


def violation(order: OrderRelation, x: GridFunction, y: GridFunction) -> float:
    """Largest amount by which x <= y fails in the order's representation."""
    x.same_grid(y)
    gap = order.representation(x) - order.representation(y)
    return float(max(0.0, gap.max()))


@dataclass(frozen=True)
class Interval:
    """Order interval [lower, upper]; construction checks lower <= upper."""

    lower: GridFunction
    upper: GridFunction
    order: OrderRelation

    def __post_init__(self):
        if not leq(self.order, self.lower, self.upper):
            raise ValueError("interval endpoints are not ordered")


def interval_contains(iv: Interval, x: GridFunction) -> bool:
    return leq(iv.order, iv.lower, x) and leq(iv.order, x, iv.upper)


@dataclass(frozen=True)
class ProbeResult:
    n: int
    seminorm: float
    ratio: float  # seminorm / n


def _wiggle(n: int, x: np.ndarray) -> np.ndarray:
    """Piecewise test function: linear ramps flanking 1 + sin(n(x-1))."""
    right = 2 * np.pi + 1
    return np.where(
        x <= 1.0,
        x,
        np.where(x <= right, 1.0 + np.sin(n * (x - 1.0)), right + 1.0 - x),
    )


def _tent(x: np.ndarray) -> np.ndarray:
    """Tent envelope with apex 2*(pi+1) at the midpoint of (0, 2 pi + 2)."""
    mid = np.pi + 1
    return np.where(x <= mid, 2.0 * x, 2.0 * (2 * mid - x))


def _trapezoid(fvals: np.ndarray, step: float) -> float:
    return float(step * (fvals.sum() - 0.5 * (fvals[0] + fvals[-1])))


def normality_probe(n: int, quad_step: float) -> ProbeResult:
    """H1 seminorm of the frequency-n wiggle trapped in a fixed order interval.

    The wiggle has slope 1, n cos(n(x-1)), -1 on its three pieces, giving
    seminorm^2 = 2 + pi n^2 exactly; the returned ratio seminorm/n tends to
    sqrt(pi).  Raises if the sandwich 0 <= wiggle <= tent fails on the
    quadrature grid (it never should; the check guards the construction).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < quad_step <= 1e-3:
        raise ValueError("quad_step must lie in (0, 1e-3]")

    pieces = [(0.0, 1.0), (1.0, 2 * np.pi + 1.0), (2 * np.pi + 1.0, 2 * np.pi + 2.0)]
    total = 0.0
    for i, (lo, hi) in enumerate(pieces):
        m = int(np.ceil((hi - lo) / quad_step))
        x = np.linspace(lo, hi, m + 1)
        if i == 1:
            deriv_sq = (n * np.cos(n * (x - 1.0))) ** 2
        else:
            deriv_sq = np.ones_like(x)
        total += _trapezoid(deriv_sq, (hi - lo) / m)

        w = _wiggle(n, x)
        if np.any(w < -1e-12) or np.any(w > _tent(x) + 1e-12):
            raise RuntimeError("wiggle escaped its envelope; probe is inconsistent")

    seminorm = float(np.sqrt(total))
    return ProbeResult(n=n, seminorm=seminorm, ratio=seminorm / n)


def closedness_check(
    order: OrderRelation,
    x_seq: list[GridFunction],
    y_seq: list[GridFunction],
    x_lim: GridFunction,
    y_lim: GridFunction,
) -> bool:
    """Check that the order passes to limits of ordered sequences.

    Raises ValueError if the hypothesis (x_k <= y_k along the sequence) fails;
    returns the truth of x_lim <= y_lim otherwise, so property tests can
    distinguish a broken precondition from a genuine closedness failure.
    """
    if len(x_seq) != len(y_seq) or not x_seq:
        raise ValueError("sequences must be non-empty and of equal length")
    for k, (xk, yk) in enumerate(zip(x_seq, y_seq)):
        if not leq(order, xk, yk):
            raise ValueError(f"precondition x_k <= y_k fails at k={k}")
    return leq(order, x_lim, y_lim)
