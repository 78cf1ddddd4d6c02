"""Pullback evaluation, synchronization curves, and equilibrium estimators.

Convergence-in-probability statements are operationalized as Monte Carlo
exceedance frequencies with Wilson confidence intervals; random measures are
reported as weighted state clouds, never densities, because the quantity of
interest is whether the cloud collapses to a point.  All Monte Carlo loops
derive one counter-based stream per path, so results are independent of
thread count and scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engines import CocycleEngine
from .grid import GridFunction, GridSpec, lap_apply_array
from .noise import NoisePath, derive_seed, make_rng
from .orders import Interval, OrderRelation, interval_contains

__all__ = [
    "SyncPoint",
    "SyncCurve",
    "EquilibriumCloud",
    "AttractorEstimate",
    "IntervalReport",
    "OrderReport",
    "pullback",
    "sync_curve",
    "invariant_sampler",
    "equilibrium_pushforward",
    "equilibrium_cesaro",
    "interval_concentration",
    "law_distance",
    "order_preservation_test",
    "attractor_estimate",
]

_Z95 = 1.959963984540054


def _wilson(successes: int, n: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    z2 = _Z95 * _Z95
    p = successes / n
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = _Z95 * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # the score interval contains the MLE; keep that true under rounding
    return min(p, max(0.0, center - half)), max(p, min(1.0, center + half))


def _parallel_map(fn, n: int, threads: int) -> list:
    """Map fn over range(n); per-index work is independent, so any thread
    count yields the same list."""
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def _cloud_diameter(engine: CocycleEngine, states: list) -> float:
    """Exact max pairwise distance; clouds here stay well below 10^3 states."""
    worst = 0.0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            d = engine.metric(states[i], states[j])
            if d > worst:
                worst = d
    return worst


@dataclass(frozen=True)
class SyncPoint:
    t: float
    p_hat: float
    ci_low: float
    ci_high: float
    n_paths: int


@dataclass(frozen=True)
class SyncCurve:
    """Exceedance frequencies P[d(phi_t(x), phi_t(y)) > epsilon] along times."""

    epsilon: float
    rows: tuple[SyncPoint, ...]

    def __post_init__(self):
        ts = [r.t for r in self.rows]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("times must be strictly increasing")
        for r in self.rows:
            if not 0.0 <= r.ci_low <= r.p_hat <= r.ci_high <= 1.0:
                raise ValueError("malformed confidence interval")


@dataclass(frozen=True)
class EquilibriumCloud:
    """Weighted state cloud estimating a statistical equilibrium."""

    states: tuple
    weights: np.ndarray
    t_pullback: float
    diameter: float
    interval_mass: float | None = None

    def __post_init__(self):
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if len(self.states) != self.weights.size:
            raise ValueError("one weight per state required")


@dataclass(frozen=True)
class AttractorEstimate:
    a_hat: object
    spread: float
    t_pullback: float
    path_seed: int


@dataclass(frozen=True)
class IntervalReport:
    interval: Interval
    coverage: float
    n_fit: int
    n_eval: int
    alpha: float


@dataclass(frozen=True)
class OrderReport:
    trials: int
    violations: int
    worst: float
    tol: float


def pullback(engine: CocycleEngine, path: NoisePath, x, horizon: float):
    """Start the system `horizon` time units in the past and evaluate at 0."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    return engine.evolve(path, x, -horizon, 0.0)


def sync_curve(
    engine: CocycleEngine,
    x,
    y,
    epsilon: float,
    times: list[float],
    n_paths: int,
    seed: int,
    allow_unordered: bool = False,
    threads: int = 1,
) -> SyncCurve:
    """Fraction of independent paths with d(phi_t(x), phi_t(y)) > epsilon.

    The pair is required to be ordered in the engine's natural order (that is
    the coupling the theory analyzes); pass allow_unordered=True for engines
    whose order is trivial, e.g. the torus.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if not allow_unordered and not engine.state_leq(x, y):
        raise ValueError(
            "states are not ordered under the engine's order; "
            "pass allow_unordered=True to compare an arbitrary pair"
        )
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])) or times[0] <= 0:
        raise ValueError("times must be positive and strictly increasing")
    t_max = times[-1]

    def one_path(i: int) -> np.ndarray:
        path = engine.sample_path(derive_seed(seed, i), 0.0, t_max)
        exceed = np.zeros(len(times), dtype=np.int64)
        xi, yi, t_prev = x, y, 0.0
        for j, t in enumerate(times):
            xi = engine.evolve(path, xi, t_prev, t)
            yi = engine.evolve(path, yi, t_prev, t)
            t_prev = t
            exceed[j] = 1 if engine.metric(xi, yi) > epsilon else 0
        return exceed

    counts = sum(_parallel_map(one_path, n_paths, threads))
    rows = []
    for j, t in enumerate(times):
        k = int(counts[j])
        lo, hi = _wilson(k, n_paths)
        rows.append(SyncPoint(t=t, p_hat=k / n_paths, ci_low=lo, ci_high=hi, n_paths=n_paths))
    return SyncCurve(epsilon=epsilon, rows=tuple(rows))


def invariant_sampler(
    engine: CocycleEngine,
    burn_in: float,
    n: int,
    gap: float,
    seed: int,
    x0=None,
) -> list:
    """States along one long forward trajectory, recorded every `gap` after
    burn-in; under mixing these approximate the invariant law."""
    if burn_in <= 0 or gap <= 0:
        raise ValueError("burn_in and gap must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    t_end = burn_in + n * gap
    path = engine.sample_path(seed, 0.0, t_end)
    x = engine.default_state() if x0 is None else x0
    x = engine.evolve(path, x, 0.0, burn_in)
    samples = []
    for k in range(n):
        x = engine.evolve(path, x, burn_in + k * gap, burn_in + (k + 1) * gap)
        samples.append(x)
    return samples


def equilibrium_pushforward(
    engine: CocycleEngine,
    path: NoisePath,
    mu_samples: list,
    horizon: float,
    threads: int = 1,
) -> EquilibriumCloud:
    """Pull the invariant-law samples back over `horizon` on one fixed path.

    Only valid for white-noise engines; for fractional drivers this one-shot
    construction has no limit and the Cesaro estimator must be used instead.
    """
    if not engine.white_noise:
        raise ValueError(
            f"{engine.kind} is not driven by white noise; use equilibrium_cesaro"
        )
    if not mu_samples:
        raise ValueError("mu_samples must be non-empty")
    states = _parallel_map(lambda i: pullback(engine, path, mu_samples[i], horizon),
                           len(mu_samples), threads)
    w = np.full(len(states), 1.0 / len(states))
    return EquilibriumCloud(
        states=tuple(states),
        weights=w,
        t_pullback=horizon,
        diameter=_cloud_diameter(engine, states),
    )


def equilibrium_cesaro(
    engine: CocycleEngine,
    path: NoisePath,
    mu_samples: list,
    r_grid: list[float],
    interval: Interval | None = None,
    threads: int = 1,
) -> EquilibriumCloud:
    """Time-averaged pullback estimator: the union over r in r_grid of the
    pullback clouds at horizon r, uniformly weighted over (r, sample) pairs.

    This is the estimator of choice when the driving noise is not white.  If
    an order interval is supplied, the weighted fraction of the cloud it
    contains is reported as well (the empirical interval mass).
    """
    if not r_grid:
        raise ValueError("r_grid must be non-empty")
    if not mu_samples:
        raise ValueError("mu_samples must be non-empty")
    r_grid = [float(r) for r in r_grid]
    if any(r <= 0 for r in r_grid):
        raise ValueError("all pullback horizons must be positive")
    jobs = [(r, x) for r in r_grid for x in mu_samples]
    states = _parallel_map(lambda i: pullback(engine, path, jobs[i][1], jobs[i][0]),
                           len(jobs), threads)
    w = np.full(len(states), 1.0 / len(states))
    mass = None
    if interval is not None:
        inside = sum(
            interval_contains(interval, _as_grid(interval.lower.spec, s)) for s in states
        )
        mass = inside / len(states)
    return EquilibriumCloud(
        states=tuple(states),
        weights=w,
        t_pullback=max(r_grid),
        diameter=_cloud_diameter(engine, states),
        interval_mass=mass,
    )


_SCALAR_SPEC = GridSpec(length=2.0, n_interior=1)  # h = 1: norms reduce to |x|


def _as_grid(spec: GridSpec, state) -> GridFunction:
    if isinstance(state, GridFunction):
        return state
    return GridFunction(spec, np.array([float(state)]))


def interval_concentration(
    mu_samples: list, order: OrderRelation, alpha: float
) -> IntervalReport:
    """Construct an order interval from half the samples, report held-out coverage.

    The samples are mapped into the order's comparison representation; the
    interval endpoints are the nodal alpha / (1-alpha) quantiles widened by one
    per-node standard deviation, mapped back to the original space.  Coverage
    on the held-out half makes the concentration claim falsifiable.
    """
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    if len(mu_samples) < 20:
        raise ValueError("need at least 20 samples")
    samples = [_as_grid(_SCALAR_SPEC, s) for s in mu_samples]
    spec = samples[0].spec
    for s in samples:
        s.same_grid(samples[0])

    n_fit = len(samples) // 2
    fit, held = samples[:n_fit], samples[n_fit:]
    reps = np.stack([order.representation(s) for s in fit])
    q_lo = np.quantile(reps, alpha, axis=0)
    q_hi = np.quantile(reps, 1.0 - alpha, axis=0)
    sd = reps.std(axis=0)
    lo_rep, hi_rep = q_lo - sd, q_hi + sd

    if order.kind == "dual_preceq":
        # map back: the endpoint whose representation is exactly lo_rep / hi_rep
        lower = GridFunction(spec, -lap_apply_array(lo_rep, spec.h))
        upper = GridFunction(spec, -lap_apply_array(hi_rep, spec.h))
    else:
        lower = GridFunction(spec, lo_rep)
        upper = GridFunction(spec, hi_rep)
    iv = Interval(lower=lower, upper=upper, order=order)
    covered = sum(interval_contains(iv, s) for s in held)
    return IntervalReport(
        interval=iv,
        coverage=covered / len(held),
        n_fit=n_fit,
        n_eval=len(held),
        alpha=alpha,
    )


def law_distance(samples_a: list, samples_b: list, metric: str = "ks_scalar") -> float:
    """Distance between two empirical laws.

    "ks_scalar": two-sample Kolmogorov-Smirnov statistic for scalar states.
    "energy_grid": energy distance (V-statistic) under the grid L2 norm; this
    vanishes exactly when the two sample lists coincide.
    """
    if not samples_a or not samples_b:
        raise ValueError("both sample sets must be non-empty")
    if metric == "ks_scalar":
        a = np.sort(np.asarray(samples_a, dtype=float))
        b = np.sort(np.asarray(samples_b, dtype=float))
        pooled = np.concatenate([a, b])
        cdf_a = np.searchsorted(a, pooled, side="right") / a.size
        cdf_b = np.searchsorted(b, pooled, side="right") / b.size
        return float(np.max(np.abs(cdf_a - cdf_b)))
    if metric == "energy_grid":
        first = samples_a[0]
        if isinstance(first, GridFunction):
            h = first.spec.h
            mat_a = np.stack([s.u for s in samples_a])
            mat_b = np.stack([s.u for s in samples_b])
        else:
            mat_a = np.stack([np.atleast_1d(np.asarray(s, dtype=float)) for s in samples_a])
            mat_b = np.stack([np.atleast_1d(np.asarray(s, dtype=float)) for s in samples_b])
            h = 1.0
        if mat_a.shape[1] != mat_b.shape[1]:
            raise ValueError("state shapes differ between the two sample sets")

        def mean_dist(u, v):
            diff = u[:, None, :] - v[None, :, :]
            return float(np.mean(np.sqrt(h * np.sum(diff * diff, axis=-1))))

        return 2.0 * mean_dist(mat_a, mat_b) - mean_dist(mat_a, mat_a) - mean_dist(mat_b, mat_b)
    raise ValueError(f"unknown law metric {metric!r}")


def order_preservation_test(
    engine: CocycleEngine,
    order: OrderRelation | None,
    trials: int,
    t_horizon: float,
    seed: int,
    tol: float = 1e-10,
    threads: int = 1,
) -> OrderReport:
    """Evolve ordered pairs on shared paths and count order violations.

    order=None uses the engine's natural state order; an explicit
    OrderRelation selects pointwise or dual comparison for grid-valued
    engines (the dual variant draws dual-positive perturbations).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dual = order is not None and order.kind == "dual_preceq"
    if dual and engine.kind != "spme":
        raise ValueError(f"the dual order is only defined for grid dynamics, not {engine.kind}")

    def one_trial(i: int) -> float:
        rng = make_rng(derive_seed(seed, 2 * i))
        if dual:
            x, y = engine.ordered_pair(rng, dual=True)
        else:
            x, y = engine.ordered_pair(rng)
        path = engine.sample_path(derive_seed(seed, 2 * i + 1), 0.0, t_horizon)
        xt = engine.evolve(path, x, 0.0, t_horizon)
        yt = engine.evolve(path, y, 0.0, t_horizon)
        if order is not None and isinstance(xt, GridFunction):
            gap = order.representation(xt) - order.representation(yt)
            return float(max(0.0, gap.max()))
        return engine.order_gap(xt, yt)

    gaps = _parallel_map(one_trial, trials, threads)
    worst = max(gaps)
    violations = sum(g > tol for g in gaps)
    return OrderReport(trials=trials, violations=violations, worst=worst, tol=tol)


def attractor_estimate(
    engine: CocycleEngine, path: NoisePath, init_set: list, horizon: float
) -> AttractorEstimate:
    """Pull a set of starts back over `horizon`; the chain midpoint estimates
    the attracting point and the max pairwise distance its residual spread."""
    if not init_set:
        raise ValueError("init_set must be non-empty")
    images = [pullback(engine, path, x, horizon) for x in init_set]
    a_hat = images[len(images) // 2]
    return AttractorEstimate(
        a_hat=a_hat,
        spread=_cloud_diameter(engine, images),
        t_pullback=horizon,
        path_seed=path.seed if path.seed is not None else -1,
    )
