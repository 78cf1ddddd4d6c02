"""Six cocycles behind one interface, each with an order-preserving scheme.

Every engine advances its state one noise-grid step at a time, and each step
consumes only the current state and the raw increment of the driving path over
that step.  Splitting an evolve call at a step boundary therefore reproduces
the exact same float operations, which makes the cocycle identity and the
shift-compatibility identity hold bit for bit -- the numerical counterpart of
the flow property the whole library is about.

Engines:

==========  =============================================================
ou          dX = -X dt + dW, Euler-Maruyama (closed-form validation anchor)
fbm_sde     dX = b(X) dt + dB^H, via the transformed random ODE, RK4
reflected   dX = b(X) dt + dW on [l, r], projected Euler-Maruyama
torus       dX = X (1 - X) dW on the unit circle, Euler-Maruyama mod 1
spme        dX = (Lap X^[m] + X) dt + dW, fully implicit monotone scheme
two_wall    dX = X_xx dt + f(X) dt + dW between two walls, semi-implicit
==========  =============================================================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    GridFunction,
    GridSpec,
    lap_apply_array,
    lap_solve_array,
    periodic_tridiag_solve,
    tridiag_solve,
)
from .noise import NoisePath, QSpec, gen_brownian, gen_fbm, gen_q_wiener

__all__ = [
    "CocycleEngine",
    "OuEngine",
    "FbmSdeEngine",
    "ReflectedEngine",
    "TorusEngine",
    "SpmeEngine",
    "TwoWallEngine",
    "FbmConfig",
    "ReflectedConfig",
    "SpmeConfig",
    "TwoWallConfig",
    "Drift",
    "make_drift",
    "NewtonConvergenceError",
    "DriftFitReport",
    "validate_drift",
    "step_spme",
    "step_fbm_sde",
    "step_reflected",
    "step_torus",
    "step_two_wall",
    "make_engine",
]


class NewtonConvergenceError(RuntimeError):
    """Implicit solve failed to converge; the message carries the step index."""


# -- drift specifications -----------------------------------------------------


@dataclass(frozen=True)
class Drift:
    """Scalar drift b(x): a named family plus parameters, usable on arrays."""

    kind: str  # "linear" | "double_well" | "zero" | "table"
    lam: float = 1.0
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()

    def __call__(self, x):
        if self.kind == "linear":
            return -self.lam * x
        if self.kind == "double_well":
            return x - x**3
        if self.kind == "zero":
            return 0.0 * x
        return np.interp(x, self.xs, self.ys)

    def as_function(self):
        """A specialized closure with the same arithmetic, for hot loops."""
        if self.kind == "linear":
            lam = self.lam
            return lambda x: -lam * x
        if self.kind == "double_well":
            return lambda x: x - x**3
        if self.kind == "zero":
            return lambda x: 0.0 * x
        xs, ys = self.xs, self.ys
        return lambda x: np.interp(x, xs, ys)


def make_drift(kind: str, **params) -> Drift:
    if kind == "linear":
        return Drift(kind="linear", lam=float(params.get("lam", 1.0)))
    if kind in ("double_well", "zero"):
        return Drift(kind=kind)
    if kind == "table":
        xs = tuple(float(v) for v in params["x"])
        ys = tuple(float(v) for v in params["y"])
        if len(xs) != len(ys) or len(xs) < 2 or any(np.diff(xs) <= 0):
            raise ValueError("table drift needs increasing x with matching y")
        return Drift(kind="table", xs=xs, ys=ys)
    raise ValueError(f"unknown drift kind {kind!r}")


@dataclass(frozen=True)
class DriftFitReport:
    """Result of fitting (b(x)-b(y))(x-y) <= min(C - c|x-y|^2, C|x-y|^2)."""

    c_upper: float  # C
    c_contraction: float  # c
    violations: int
    worst_pair: tuple[float, float] | None
    samples: int


def validate_drift(
    drift,
    box: tuple[float, float] = (-3.0, 3.0),
    samples: int = 10_000,
    seed: int = 0,
    cap: float = 10.0,
) -> DriftFitReport:
    """Fit the two-sided one-sided-Lipschitz bound on sampled pairs from a box.

    Scans a grid of contraction rates c: for each, the smallest admissible C
    is max over pairs of (v + c s, v/s) with v = (b(x)-b(y))(x-y), s = |x-y|^2.
    Reports the smallest such C over the scan and the largest c attaining it;
    if even the best C exceeds ``cap`` the drift is flagged with the worst
    offending pair.  A failed fit is a report, not an error.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    lo, hi = box
    x = lo + (hi - lo) * rng.random(samples)
    y = lo + (hi - lo) * rng.random(samples)
    keep = x != y
    x, y = x[keep], y[keep]
    v = (np.asarray(drift(x)) - np.asarray(drift(y))) * (x - y)
    s = (x - y) ** 2

    c_ratio = float(max(0.0, np.max(v / s)))  # branch v <= C s
    c_grid = np.unique(np.concatenate([np.geomspace(1e-3, 10.0, 64), [1.0]]))
    c_of = np.array([max(c_ratio, float(np.max(v + c * s)), 0.0) for c in c_grid])
    best = float(c_of.min())
    if best <= cap:
        feasible = c_grid[c_of <= best * (1 + 1e-9) + 1e-12]
        c_star = float(feasible.max())
        return DriftFitReport(
            c_upper=best,
            c_contraction=c_star,
            violations=0,
            worst_pair=None,
            samples=int(x.size),
        )
    # infeasible under the cap: count violations at (cap, smallest c scanned)
    c_small = float(c_grid[0])
    bad = v > np.minimum(cap - c_small * s, cap * s)
    worst_idx = int(np.argmax(v - np.minimum(cap - c_small * s, cap * s)))
    return DriftFitReport(
        c_upper=cap,
        c_contraction=c_small,
        violations=int(bad.sum()),
        worst_pair=(float(x[worst_idx]), float(y[worst_idx])),
        samples=int(x.size),
    )


# -- per-engine configurations -------------------------------------------------


@dataclass(frozen=True)
class FbmConfig:
    hurst: float
    drift: Drift
    ode_substeps: int = 1

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise ValueError("hurst must lie in (0,1)")
        if self.ode_substeps < 1:
            raise ValueError("ode_substeps must be >= 1")
        report = validate_drift(self.drift)
        if report.violations:
            raise ValueError(
                f"drift fails the one-sided growth bound on {report.violations} "
                f"of {report.samples} sampled pairs (worst at {report.worst_pair})"
            )


@dataclass(frozen=True)
class ReflectedConfig:
    lower: float
    upper: float
    drift: Drift

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")


@dataclass(frozen=True)
class SpmeConfig:
    grid: GridSpec
    m: float
    qspec: QSpec
    newton_tol: float = 1e-12
    newton_max_iter: int = 40
    jac_reg: float = 1e-12

    def __post_init__(self):
        if not self.m > 1:
            raise ValueError("nonlinearity exponent m must exceed 1")
        if not 0 < self.newton_tol <= 1e-10:
            raise ValueError("newton_tol must lie in (0, 1e-10]")
        if not 0 <= self.jac_reg <= 1e-10:
            raise ValueError("jac_reg must lie in [0, 1e-10]")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")


@dataclass(frozen=True)
class TwoWallConfig:
    n_nodes: int
    length: float
    h1: np.ndarray
    h2: np.ndarray
    drift: Drift

    def __post_init__(self):
        h1 = np.asarray(self.h1, dtype=float)
        h2 = np.asarray(self.h2, dtype=float)
        if h1.shape != (self.n_nodes,) or h2.shape != (self.n_nodes,):
            raise ValueError("walls must have one value per node")
        if not np.all(h1 < h2):
            raise ValueError("need h1 < h2 at every node")
        if not self.length > 0:
            raise ValueError("length must be positive")
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        h1.flags.writeable = False
        h2.flags.writeable = False

    @property
    def h(self) -> float:
        return self.length / self.n_nodes


# -- step functions (the scheme of each engine, one noise-grid step) -----------


def _power(u: np.ndarray, m: float) -> np.ndarray:
    """Odd power |u|^{m-1} u."""
    return np.abs(u) ** (m - 1) * u


def _solve_scalar_power(a: float, c: float, m: float, q: float) -> float:
    """Root of a w + c |w|^{m-1} w = q for a, c > 0 (strictly increasing)."""
    if q == 0.0:
        return 0.0
    qa = abs(q)
    hi = qa / a
    lo = 0.0
    w = min(hi, qa / (a + c * hi ** (m - 1)))
    for _ in range(100):
        g = a * w + c * w**m - qa
        if abs(g) <= 1e-15 * (qa + 1.0):
            break
        if g > 0:
            hi = w
        else:
            lo = w
        step = g / (a + c * m * w ** (m - 1))
        w_new = w - step
        if not lo < w_new < hi:
            w_new = 0.5 * (lo + hi)
        w = w_new
    return float(np.sign(q) * w)


def _spme_residual(u, rhs, dt, m, h):
    return (1.0 - dt) * u - dt * lap_apply_array(_power(u, m), h) - rhs


def _spme_gauss_seidel(u, rhs, dt, m, h, tol, max_sweeps=5000):
    """Monotone nodal sweep fallback; each node solves its scalar equation."""
    n = u.shape[0]
    a = 1.0 - dt
    c = 2.0 * dt / (h * h)
    w = dt / (h * h)
    u = u.copy()
    p = _power(u, m)
    for _ in range(max_sweeps):
        for j in range(n):
            left = p[j - 1] if j > 0 else 0.0
            right = p[j + 1] if j < n - 1 else 0.0
            q = rhs[j] + w * (left + right)
            u[j] = _solve_scalar_power(a, c, m, q)
            p[j] = abs(u[j]) ** (m - 1) * u[j]
        if np.max(np.abs(_spme_residual(u, rhs, dt, m, h))) <= tol:
            return u
    raise NewtonConvergenceError("nodal sweep fallback stalled")


def _spme_implicit_solve(u0, rhs, dt, m, h, tol, max_iter, reg):
    """Damped Newton for u - dt (Lap u^[m] + u) = rhs, tridiagonal Jacobian.

    The residual uses the exact odd power; only the Jacobian derivative is
    regularized, so the accepted solution solves the true system.
    """
    inv_h2 = 1.0 / (h * h)
    u = u0.copy()
    r = _spme_residual(u, rhs, dt, m, h)
    rn = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if rn <= tol:
            return u
        d = m * (np.abs(u) + reg) ** (m - 1.0)
        diag = (1.0 - dt) + 2.0 * dt * inv_h2 * d
        lower = np.empty_like(d)
        upper = np.empty_like(d)
        lower[1:] = -dt * inv_h2 * d[:-1]
        upper[:-1] = -dt * inv_h2 * d[1:]
        lower[0] = upper[-1] = 0.0
        s = tridiag_solve(lower, diag, upper, -r)
        lam = 1.0
        while lam >= 1.0 / 1024.0:
            u_try = u + lam * s
            r_try = _spme_residual(u_try, rhs, dt, m, h)
            rn_try = float(np.max(np.abs(r_try)))
            if rn_try <= (1.0 - 0.25 * lam) * rn or rn_try <= tol:
                u, r, rn = u_try, r_try, rn_try
                break
            lam *= 0.5
        else:
            break  # damping exhausted; hand over to the monotone sweep
    if rn <= tol:
        return u
    return _spme_gauss_seidel(u, rhs, dt, m, h, tol)


def step_spme(cfg: SpmeConfig, x: GridFunction, dw: np.ndarray, dt: float) -> GridFunction:
    """One fully implicit step of the noisy porous-medium dynamics.

    Solves u - dt (Lap_h u^[m] + u) = x + dw.  Implicit treatment of both the
    degenerate diffusion and the +u term keeps the nodal system an M-function
    for dt < 1, which is exactly what makes the step order-preserving.
    """
    if not 0 < dt < 1:
        raise ValueError("spme requires 0 < dt < 1")
    dw = dw.u if isinstance(dw, GridFunction) else np.asarray(dw, dtype=float)
    rhs = x.u + dw
    u = _spme_implicit_solve(
        x.u, rhs, dt, cfg.m, cfg.grid.h, cfg.newton_tol, cfg.newton_max_iter, cfg.jac_reg
    )
    return GridFunction(x.spec, u)


def _rk4_transformed(drift, y: float, dt: float, substeps: int, b_end: float) -> float:
    """Integrate dY = b(Y + B(t)) dt over one step with B linear from 0 to b_end.

    This is the transformed random ODE of the additive-noise SDE, re-anchored
    at the step start so the only path data consumed is the step increment.
    """
    h = dt / substeps
    y = float(y)
    for i in range(substeps):
        t0 = i * h
        b0 = (t0 / dt) * b_end
        bh = ((t0 + 0.5 * h) / dt) * b_end
        b1 = ((t0 + h) / dt) * b_end
        k1 = drift(y + b0)
        k2 = drift(y + 0.5 * h * k1 + bh)
        k3 = drift(y + 0.5 * h * k2 + bh)
        k4 = drift(y + h * k3 + b1)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def step_fbm_sde(cfg: FbmConfig, y_state: float, path: NoisePath, t: float, dt: float) -> float:
    """Advance the transformed state Y over [t, t+dt] along the given path.

    The exposed flow state is X = Y + B(t); B is sampled by linear
    interpolation between the path's grid values inside the step.  Writing
    Z = Y + B(t) reduces the integration to the step-anchored kernel.
    """
    b_t = float(path.value_at(t)[0])
    delta = float(path.increment(t, t + dt)[0])
    z = _rk4_transformed(cfg.drift, y_state + b_t, dt, cfg.ode_substeps, delta)
    return z - b_t


def step_reflected(cfg: ReflectedConfig, x: float, dw: float, dt: float) -> float:
    """Projected Euler-Maruyama: Euler step, then clamp into [lower, upper]."""
    if not cfg.lower <= x <= cfg.upper:
        raise ValueError(f"state {x} outside the domain [{cfg.lower}, {cfg.upper}]")
    z = x + float(cfg.drift(x)) * dt + dw
    return min(max(z, cfg.lower), cfg.upper)


def step_torus(x: float, dw: float, dt: float) -> float:
    """Euler-Maruyama for dX = X(1-X) dW, reduced mod 1 onto [0, 1)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"state {x} outside [0, 1)")
    z = x + x * (1.0 - x) * dw
    return float(z - np.floor(z))


def step_two_wall(cfg: TwoWallConfig, x: np.ndarray, dw: np.ndarray, dt: float) -> np.ndarray:
    """Semi-implicit heat step on the circle, then nodal projection to the walls.

    Solves (I - dt Lap_per) u = x + dt f(x) + dw with the periodic tridiagonal
    solver and clips u into [h1, h2].  The resolvent is inverse-monotone and
    clipping is monotone, so the composed step preserves the nodal order.
    """
    if np.any(x < cfg.h1) or np.any(x > cfg.h2):
        raise ValueError("state violates the walls on input")
    inv_h2 = 1.0 / (cfg.h * cfg.h)
    rhs = x + dt * np.asarray(cfg.drift(x), dtype=float) + dw
    u = periodic_tridiag_solve(-dt * inv_h2, 1.0 + 2.0 * dt * inv_h2, rhs)
    return np.minimum(np.maximum(u, cfg.h1), cfg.h2)


# -- the engine interface -------------------------------------------------------


class CocycleEngine:
    """Base class: a named dynamical rule evolved along a noise path.

    Subclasses implement ``_step(state, dw)`` for one noise-grid step plus the
    state-space plumbing (metric, natural order, sampling helpers).  evolve
    requires the engine step to equal the path step; composition is then a
    plain concatenation of identical step computations.
    """

    kind: str = ""
    path_kind: str = ""
    white_noise: bool = True

    def __init__(self, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = dt

    # state plumbing, overridden where states are not plain floats
    @property
    def path_dim(self) -> int:
        return 1

    def _unwrap(self, x):
        return float(x)

    def _wrap(self, state):
        return float(state)

    def _check_state(self, x) -> None:
        pass

    def _step(self, state, dw):
        raise NotImplementedError

    def _step_scalar(self, state, dw):
        """Scalar fast path; default defers to _step with an indexable dw."""
        return self._step(state, (dw,))

    def evolve(self, path: NoisePath, x, t0: float, t1: float):
        """The scheme's composition over the steps of [t0, t1]; t1 = t0 is id."""
        if path.kind != self.path_kind:
            raise ValueError(f"{self.kind} engine needs a {self.path_kind} path")
        if path.dim != self.path_dim:
            raise ValueError(f"path dimension {path.dim} != engine dimension {self.path_dim}")
        if abs(path.dt - self.dt) > 1e-9 * self.dt:
            raise ValueError(f"path dt {path.dt} != engine dt {self.dt}")
        if t1 < t0:
            raise ValueError("need t0 <= t1")
        k0, k1 = path.index(t0), path.index(t1)
        self._check_state(x)
        state = self._unwrap(x)
        if self.path_dim == 1:
            col = path.raw[:, 0]
            step = self._step_scalar
            for k in range(k0, k1):
                state = step(state, col[k + 1] - col[k])
            return self._wrap(state)
        raw = path.raw
        for k in range(k0, k1):
            try:
                state = self._step(state, raw[k + 1] - raw[k])
            except NewtonConvergenceError as err:
                raise NewtonConvergenceError(f"step {k - k0} of [{t0}, {t1}]: {err}") from err
        return self._wrap(state)

    # diagnostics plumbing
    def metric(self, x, y) -> float:
        return abs(float(x) - float(y))

    def sample_path(self, seed: int, t0: float, t1: float) -> NoisePath:
        raise NotImplementedError

    def default_state(self):
        return 0.0

    def state_leq(self, x, y, tol: float = 1e-10) -> bool:
        """The engine's natural order on states."""
        return float(x) <= float(y) + tol

    def order_gap(self, x, y) -> float:
        """Largest violation of x <= y in the natural order (0 when ordered)."""
        return max(0.0, float(x) - float(y))

    def random_state(self, rng: np.random.Generator):
        return float(rng.standard_normal())

    def ordered_pair(self, rng: np.random.Generator):
        x = self.random_state(rng)
        return x, x + abs(float(rng.standard_normal()))


class OuEngine(CocycleEngine):
    """dX = -X dt + dW by Euler-Maruyama; the closed-form validation anchor.

    Its pullback limit is the explicit stochastic integral of e^s against the
    driving increments, which the acceptance suite uses as ground truth.
    """

    kind = "ou"
    path_kind = "brownian"

    def _step(self, state, dw):
        return state - state * self.dt + dw[0]

    def _step_scalar(self, state, dw):
        return state - state * self.dt + dw

    def sample_path(self, seed, t0, t1):
        return gen_brownian(seed, t0, t1, self.dt, dim=1)


class FbmSdeEngine(CocycleEngine):
    """Additive fractional noise SDE via the transformed random ODE."""

    kind = "fbm_sde"
    path_kind = "fbm"
    white_noise = False

    def __init__(self, dt: float, config: FbmConfig):
        super().__init__(dt)
        self.config = config
        self._drift_fn = config.drift.as_function()

    def _step(self, state, dw):
        return self._step_scalar(state, dw[0])

    def _step_scalar(self, state, dw):
        z = _rk4_transformed(self._drift_fn, state, self.dt, self.config.ode_substeps, dw)
        return z + dw

    def sample_path(self, seed, t0, t1):
        return gen_fbm(seed, self.config.hurst, t0, t1, self.dt)


class ReflectedEngine(CocycleEngine):
    """Reflected diffusion on [lower, upper] by projected Euler-Maruyama."""

    kind = "reflected"
    path_kind = "brownian"

    def __init__(self, dt: float, config: ReflectedConfig):
        super().__init__(dt)
        self.config = config

    def _check_state(self, x):
        if not self.config.lower <= float(x) <= self.config.upper:
            raise ValueError(
                f"state {x} outside [{self.config.lower}, {self.config.upper}]"
            )

    def _step(self, state, dw):
        return step_reflected(self.config, state, dw[0], self.dt)

    def _step_scalar(self, state, dw):
        return step_reflected(self.config, state, dw, self.dt)

    def sample_path(self, seed, t0, t1):
        return gen_brownian(seed, t0, t1, self.dt, dim=1)

    def default_state(self):
        return 0.5 * (self.config.lower + self.config.upper)

    def random_state(self, rng):
        lo, hi = self.config.lower, self.config.upper
        return lo + (hi - lo) * float(rng.random())

    def ordered_pair(self, rng):
        lo, hi = self.config.lower, self.config.upper
        x = self.random_state(rng)
        y = min(x + 0.3 * (hi - lo) * abs(float(rng.standard_normal())), hi)
        return x, y


class TorusEngine(CocycleEngine):
    """dX = X(1-X) dW on the circle [0,1); the order there is trivial."""

    kind = "torus"
    path_kind = "brownian"

    def _check_state(self, x):
        if not 0.0 <= float(x) < 1.0:
            raise ValueError(f"state {x} outside [0, 1)")

    def _step(self, state, dw):
        return step_torus(state, dw[0], self.dt)

    def _step_scalar(self, state, dw):
        return step_torus(state, dw, self.dt)

    def sample_path(self, seed, t0, t1):
        return gen_brownian(seed, t0, t1, self.dt, dim=1)

    def default_state(self):
        return 0.5

    def metric(self, x, y) -> float:
        gap = abs(float(x) - float(y))
        return min(gap, 1.0 - gap)

    def state_leq(self, x, y, tol=1e-10):
        # trivial partial order: comparable only when equal
        return self.metric(x, y) <= tol

    def order_gap(self, x, y):
        return self.metric(x, y)

    def random_state(self, rng):
        return float(rng.random())

    def ordered_pair(self, rng):
        x = self.random_state(rng)
        return x, x


class SpmeEngine(CocycleEngine):
    """Noisy porous-medium dynamics on the Dirichlet grid, implicit stepping.

    State space is the grid H^{-1}; the engine metric is the H^{-1} norm of
    the difference.  dt < 1 is required so the implicit nodal system keeps its
    M-function structure (the source of the discrete comparison principle).
    """

    kind = "spme"
    path_kind = "q_wiener"

    def __init__(self, dt: float, config: SpmeConfig):
        if not dt < 1:
            raise ValueError("spme requires dt < 1")
        super().__init__(dt)
        self.config = config

    @property
    def path_dim(self):
        return self.config.grid.n_interior

    def _unwrap(self, x: GridFunction):
        return x.u.copy()

    def _wrap(self, state):
        return GridFunction(self.config.grid, state)

    def _check_state(self, x):
        if not isinstance(x, GridFunction) or x.spec != self.config.grid:
            raise ValueError("spme state must be a GridFunction on the engine grid")

    def _step(self, state, dw):
        cfg = self.config
        rhs = state + dw
        return _spme_implicit_solve(
            state, rhs, self.dt, cfg.m, cfg.grid.h,
            cfg.newton_tol, cfg.newton_max_iter, cfg.jac_reg,
        )

    def sample_path(self, seed, t0, t1):
        return gen_q_wiener(seed, self.config.qspec, self.config.grid.n_interior, t0, t1, self.dt)

    def default_state(self):
        return GridFunction(self.config.grid, np.zeros(self.config.grid.n_interior))

    def metric(self, x: GridFunction, y: GridFunction) -> float:
        diff = x.u - y.u
        v = lap_solve_array(diff, self.config.grid.h)
        return float(np.sqrt(self.config.grid.h * np.dot(diff, v)))

    def state_leq(self, x, y, tol=1e-10):
        return bool(np.all(x.u <= y.u + tol))

    def order_gap(self, x, y):
        return float(max(0.0, np.max(x.u - y.u)))

    def random_state(self, rng):
        return GridFunction(self.config.grid, rng.standard_normal(self.path_dim))

    def ordered_pair(self, rng, dual: bool = False):
        """Pointwise-ordered pair, or a dual-order pair when dual=True."""
        x = self.random_state(rng)
        if dual:
            bump = np.abs(rng.standard_normal(self.path_dim))
            delta = -lap_apply_array(bump, self.config.grid.h)
        else:
            delta = np.abs(rng.standard_normal(self.path_dim))
        return x, GridFunction(self.config.grid, x.u + delta)


class TwoWallEngine(CocycleEngine):
    """Heat equation with drift between two walls on the circle."""

    kind = "two_wall"
    path_kind = "brownian"

    def __init__(self, dt: float, config: TwoWallConfig):
        super().__init__(dt)
        self.config = config

    @property
    def path_dim(self):
        return self.config.n_nodes

    def _unwrap(self, x):
        return np.array(x, dtype=float)

    def _wrap(self, state):
        return state

    def _check_state(self, x):
        x = np.asarray(x)
        if x.shape != (self.config.n_nodes,):
            raise ValueError("two_wall state must carry one value per node")
        if np.any(x < self.config.h1) or np.any(x > self.config.h2):
            raise ValueError("state violates the walls")

    def _step(self, state, dw):
        return step_two_wall(self.config, state, dw, self.dt)

    def sample_path(self, seed, t0, t1):
        return gen_brownian(seed, t0, t1, self.dt, dim=self.config.n_nodes)

    def default_state(self):
        return 0.5 * (self.config.h1 + self.config.h2)

    def metric(self, x, y) -> float:
        diff = np.asarray(x) - np.asarray(y)
        return float(np.sqrt(self.config.h * np.dot(diff, diff)))

    def state_leq(self, x, y, tol=1e-10):
        return bool(np.all(np.asarray(x) <= np.asarray(y) + tol))

    def order_gap(self, x, y):
        return float(max(0.0, np.max(np.asarray(x) - np.asarray(y))))

    def random_state(self, rng):
        cfg = self.config
        return cfg.h1 + (cfg.h2 - cfg.h1) * rng.random(cfg.n_nodes)

    def ordered_pair(self, rng):
        cfg = self.config
        x = self.random_state(rng)
        y = np.minimum(x + np.abs(rng.standard_normal(cfg.n_nodes)) * 0.3, cfg.h2)
        return x, y


def make_engine(kind: str, dt: float, config=None) -> CocycleEngine:
    """Factory used by the CLI; library code can construct engines directly."""
    if kind == "ou":
        return OuEngine(dt)
    if kind == "torus":
        return TorusEngine(dt)
    if kind == "fbm_sde":
        return FbmSdeEngine(dt, config)
    if kind == "reflected":
        return ReflectedEngine(dt, config)
    if kind == "spme":
        return SpmeEngine(dt, config)
    if kind == "two_wall":
        return TwoWallEngine(dt, config)
    raise ValueError(f"unknown engine kind {kind!r}")
