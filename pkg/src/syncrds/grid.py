"""Discrete 1-D Dirichlet calculus: Laplacian, its inverse, and norms.

The tridiagonal solves are written out (no pivoting) rather than delegated to
LAPACK: for the M-matrix -Lap_h the sweep contains no cancellations, so a
nonnegative right-hand side provably yields a nonnegative solution bit for
bit.  That sign-exactness is what the dual partial order is built on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "GridFunction",
    "laplacian_apply",
    "laplacian_solve",
    "norm",
    "tridiag_solve",
    "periodic_tridiag_solve",
    "write_grid_function",
    "read_grid_function",
]


@dataclass(frozen=True)
class GridSpec:
    """Interior nodes j*h, j=1..N, of a Dirichlet grid on (0, L), h = L/(N+1)."""

    length: float
    n_interior: int

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("length must be positive")
        if self.n_interior < 1:
            raise ValueError("n_interior must be >= 1")

    @property
    def h(self) -> float:
        return self.length / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n_interior + 1)


@dataclass(frozen=True)
class GridFunction:
    """Interior nodal values of a function vanishing on the boundary."""

    spec: GridSpec
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.spec.n_interior,):
            raise ValueError(
                f"expected {self.spec.n_interior} nodal values, got shape {u.shape}"
            )
        if not np.all(np.isfinite(u)):
            raise ValueError("nodal values must be finite")
        object.__setattr__(self, "u", u)
        u.flags.writeable = False

    def same_grid(self, other: "GridFunction") -> None:
        if self.spec != other.spec:
            raise ValueError("grid mismatch")


def lap_apply_array(u: np.ndarray, h: float) -> np.ndarray:
    """(u_{j-1} - 2 u_j + u_{j+1}) / h^2 with zero boundary values."""
    out = -2.0 * u
    out[1:] += u[:-1]
    out[:-1] += u[1:]
    return out / (h * h)


def tridiag_solve(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Thomas algorithm; row i is lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1].

    No pivoting: intended for the diagonally dominant systems used here.
    """
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def periodic_tridiag_solve(off: float, diag: float, rhs: np.ndarray) -> np.ndarray:
    """Solve the circulant tridiagonal system with constant coefficients.

    Row i reads off*x[i-1] + diag*x[i] + off*x[i+1] = rhs[i], indices mod n.
    Sherman-Morrison reduction to a plain tridiagonal solve.
    """
    n = rhs.shape[0]
    if n == 1:
        # each node is its own left and right neighbour
        return rhs / (diag + 2.0 * off)
    if n == 2:
        a = np.array([[diag, 2.0 * off], [2.0 * off, diag]])
        return np.linalg.solve(a, rhs)
    gamma = -diag
    d = np.full(n, diag)
    d[0] = diag - gamma
    d[n - 1] = diag - off * off / gamma
    lo = np.full(n, off)
    up = np.full(n, off)
    y = tridiag_solve(lo, d, up, rhs)
    u = np.zeros(n)
    u[0] = gamma
    u[n - 1] = off
    q = tridiag_solve(lo, d, up, u)
    factor = (y[0] + (off / gamma) * y[n - 1]) / (1.0 + q[0] + (off / gamma) * q[n - 1])
    return y - factor * q


def lap_solve_array(f: np.ndarray, h: float) -> np.ndarray:
    """Solve -Lap_h v = f on the Dirichlet grid."""
    n = f.shape[0]
    inv_h2 = 1.0 / (h * h)
    lower = np.full(n, -inv_h2)
    upper = np.full(n, -inv_h2)
    diag = np.full(n, 2.0 * inv_h2)
    return tridiag_solve(lower, diag, upper, f)


def laplacian_apply(f: GridFunction) -> GridFunction:
    return GridFunction(f.spec, lap_apply_array(f.u.copy(), f.spec.h))


def laplacian_solve(f: GridFunction) -> GridFunction:
    return GridFunction(f.spec, lap_solve_array(f.u, f.spec.h))


def norm(f: GridFunction, which: str, p: float | None = None) -> float:
    """Grid norms: "L2", "H10", "Hminus1", or "Lp" with exponent p >= 1.

    L2       sqrt(h sum u_j^2)
    H10      sqrt(sum_{j=0..N} (u_{j+1}-u_j)^2 / h), boundary values zero
    Hminus1  sqrt(h <u, (-Lap_h)^{-1} u>)
    Lp       (h sum |u_j|^p)^{1/p}
    """
    u, h = f.u, f.spec.h
    if which == "L2":
        return float(np.sqrt(h * np.dot(u, u)))
    if which == "H10":
        d = np.diff(u, prepend=0.0, append=0.0)
        return float(np.sqrt(np.dot(d, d) / h))
    if which == "Hminus1":
        v = lap_solve_array(u, h)
        return float(np.sqrt(h * np.dot(u, v)))
    if which == "Lp":
        if p is None or p < 1:
            raise ValueError(f"Lp norm needs an exponent p >= 1, got {p}")
        return float((h * np.sum(np.abs(u) ** p)) ** (1.0 / p))
    raise ValueError(f"unknown norm {which!r}")


def write_grid_function(f: GridFunction, fh) -> None:
    """Text form: one nodal value per line, 17 significant digits."""
    for v in f.u:
        fh.write(f"{v:.17g}\n")


def read_grid_function(fh, spec: GridSpec) -> GridFunction:
    values = [float(line) for line in fh.read().split()]
    return GridFunction(spec, np.array(values))
