"""Two-sided driving noise: Brownian, Q-Wiener and fractional Brownian paths.

All generators are pure functions of (seed, parameters), built on counter-based
Philox streams, so a given seed yields a bit-identical path on any machine and
under any thread count.  Paths are sampled on a uniform grid and immutable
after creation; the time shift re-labels the grid and re-anchors the value
origin without touching the stored samples, which keeps shift composition and
increment extraction exact at the bit level.
"""

from __future__ import annotations

import dataclasses
import struct
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoisePath",
    "QSpec",
    "CirculantEmbeddingError",
    "gen_brownian",
    "gen_q_wiener",
    "gen_fbm",
    "derive_seed",
    "make_rng",
    "dump_noise_path",
    "load_noise_path",
]

# Hard cap on samples per path; requests beyond it are rejected, not truncated.
MAX_STEPS = 20_000_000

_MAGIC = b"SYNCRDS1"
_HEADER = struct.Struct("<8sIIdd")  # magic, n_samples, dim, dt, t_start


class CirculantEmbeddingError(RuntimeError):
    """Raised when the circulant covariance embedding is not nonnegative."""


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator keyed directly by the (arbitrary-size) integer seed."""
    key = np.array([seed % 2**64, (seed >> 64) % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, stream: int) -> int:
    """Derive an independent sub-stream seed (stream index in the high word).

    Distinct (seed, stream) pairs map to distinct Philox keys, so Monte Carlo
    paths drawn from derived seeds are independent and scheduling-free.
    """
    if stream < 0:
        raise ValueError("stream index must be nonnegative")
    return (seed % 2**64) + ((stream + 1) << 64)


def _step_count(t0: float, t1: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t1 > t0:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    n = round((t1 - t0) / dt)
    if n < 1 or abs(t0 + n * dt - t1) > 1e-6 * dt:
        raise ValueError(f"dt={dt} does not divide the window [{t0}, {t1}]")
    if n > MAX_STEPS:
        raise ValueError(f"window requires {n} steps, exceeding MAX_STEPS={MAX_STEPS}")
    return n


@dataclass(frozen=True)
class NoisePath:
    """A uniformly sampled noise realization on a (possibly two-sided) window.

    ``raw`` holds the stored samples, shape (n_samples, dim); sample k lives at
    time ``t_start + k*dt`` and the path value there is ``raw[k] - raw[base]``.
    Shifts only update ``shift_steps`` (an integer, so the time axis never
    accumulates float error) and ``base``; increments are always differences of
    stored samples and therefore unaffected by shifting.
    """

    kind: str  # "brownian" | "q_wiener" | "fbm"
    dt: float
    raw: np.ndarray
    origin: float  # time of raw[0] at generation
    shift_steps: int = 0
    base: int = 0
    seed: int | None = None
    hurst: float | None = None

    def __post_init__(self):
        if self.raw.ndim != 2 or self.raw.shape[0] < 2:
            raise ValueError("path needs at least two samples of common dimension")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.base < self.raw.shape[0]:
            raise ValueError("base index outside the sample range")
        self.raw.flags.writeable = False

    # -- window bookkeeping ------------------------------------------------

    @property
    def n_samples(self) -> int:
        return self.raw.shape[0]

    @property
    def dim(self) -> int:
        return self.raw.shape[1]

    @property
    def t_start(self) -> float:
        return self.origin - self.shift_steps * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n_samples - 1) * self.dt

    def index(self, t: float) -> int:
        """Sample index of grid time t; rejects misaligned or out-of-window t."""
        k = round((t - self.t_start) / self.dt)
        if abs(self.t_start + k * self.dt - t) > 1e-6 * self.dt:
            raise ValueError(f"time {t} is not aligned to the dt={self.dt} grid")
        if not 0 <= k < self.n_samples:
            raise ValueError(f"time {t} outside window [{self.t_start}, {self.t_end}]")
        return k

    # -- values and increments ----------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Path values (n_samples, dim) relative to the current anchor."""
        return self.raw - self.raw[self.base]

    def value_at(self, t: float) -> np.ndarray:
        return self.raw[self.index(t)] - self.raw[self.base]

    def increment(self, s: float, t: float) -> np.ndarray:
        """path(t) - path(s), componentwise; s <= t, both grid-aligned."""
        ks, kt = self.index(s), self.index(t)
        if kt < ks:
            raise ValueError(f"need s <= t, got s={s}, t={t}")
        return self.raw[kt] - self.raw[ks]

    def shift(self, s: float) -> "NoisePath":
        """The time-shifted path t -> path(t+s) - path(s).

        s must be a grid-aligned time inside the window.  The stored samples
        are shared with the original path, so increments of the shifted path
        are bit-identical to the corresponding increments of the original.
        """
        js = round(s / self.dt)
        if abs(js * self.dt - s) > 1e-6 * self.dt:
            raise ValueError(f"shift {s} is not an integer multiple of dt={self.dt}")
        ks = self.index(s)  # also enforces the in-window requirement
        return dataclasses.replace(self, shift_steps=self.shift_steps + js, base=ks)


@dataclass(frozen=True)
class QSpec:
    """Spectral covariance of a trace-class Wiener process on (0, L).

    Mode i (1-based) carries amplitude q[i-1] on the Dirichlet sine basis
    sqrt(2/L) sin(i pi x / L); the trace is sum(q_i^2).
    """

    n_modes: int
    q: tuple[float, ...]
    domain_length: float

    def __post_init__(self):
        q = tuple(float(v) for v in self.q)
        object.__setattr__(self, "q", q)
        if self.n_modes < 1 or len(q) != self.n_modes:
            raise ValueError("n_modes must be >= 1 and match len(q)")
        if not all(np.isfinite(v) and v >= 0 for v in q):
            raise ValueError("mode amplitudes must be finite and nonnegative")
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")

    @property
    def trace(self) -> float:
        return float(sum(v * v for v in self.q))

    @property
    def nondegenerate(self) -> bool:
        return min(self.q) > 0


def gen_brownian(seed: int, t0: float, t1: float, dt: float, dim: int = 1) -> NoisePath:
    """Standard Brownian path on [t0, t1]: independent N(0, dt) increments.

    The path is pinned to 0 at t0.  Identical seeds give bit-identical paths.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    n = _step_count(t0, t1, dt)
    rng = make_rng(seed)
    inc = rng.standard_normal((n, dim)) * np.sqrt(dt)
    raw = np.zeros((n + 1, dim))
    np.cumsum(inc, axis=0, out=raw[1:])
    return NoisePath(kind="brownian", dt=dt, raw=raw, origin=t0, seed=seed)


def gen_q_wiener(
    seed: int, qspec: QSpec, grid_n: int, t0: float, t1: float, dt: float
) -> NoisePath:
    """Q-Wiener path evaluated at the interior nodes of the grid on (0, L).

    Nodal values are W(t, x_j) = sum_i q_i sqrt(2/L) sin(i pi x_j / L) b_i(t)
    over n_modes independent scalar Brownian motions b_i.
    """
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    if qspec.n_modes > grid_n:
        warnings.warn(
            f"{qspec.n_modes} modes on {grid_n} nodes: the excess modes alias",
            stacklevel=2,
        )
    n = _step_count(t0, t1, dt)
    rng = make_rng(seed)
    inc = rng.standard_normal((n, qspec.n_modes)) * np.sqrt(dt)
    betas = np.zeros((n + 1, qspec.n_modes))
    np.cumsum(inc, axis=0, out=betas[1:])

    length = qspec.domain_length
    nodes = (np.arange(1, grid_n + 1) * length / (grid_n + 1))[None, :]
    modes = np.arange(1, qspec.n_modes + 1)[:, None]
    basis = np.asarray(qspec.q)[:, None] * np.sqrt(2.0 / length) * np.sin(
        modes * np.pi * nodes / length
    )
    raw = betas @ basis
    return NoisePath(kind="q_wiener", dt=dt, raw=raw, origin=t0, seed=seed)


def _fgn_covariances(hurst: float, n: int) -> np.ndarray:
    """Autocovariance gamma(0..n) of unit-step fractional Gaussian noise."""
    k = np.arange(n + 1, dtype=float)
    return 0.5 * ((k + 1) ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst) - 2 * k ** (2 * hurst))


def _fgn_davies_harte(
    rng: np.random.Generator, hurst: float, n: int, allow_truncation: bool
) -> np.ndarray:
    """n fractional Gaussian noise samples by circulant embedding.

    Davies & Harte (1987); see also Dieker's simulation survey.  The length-2n
    circulant of the increment autocovariance is diagonalized by the FFT; a
    nonnegative spectrum yields exact samples.  A genuinely negative eigenvalue
    aborts unless truncation is explicitly allowed (then the result is only
    approximate in law).
    """
    gamma = _fgn_covariances(hurst, n)
    row = np.concatenate([gamma, gamma[n - 1:0:-1]])  # length 2n
    eig = np.fft.fft(row).real
    lo, hi = eig.min(), eig.max()
    if lo < 0:
        if lo >= -1e-12 * hi:
            eig = np.clip(eig, 0.0, None)  # rounding noise only
        elif allow_truncation:
            eig = np.clip(eig, 0.0, None)
        else:
            raise CirculantEmbeddingError(
                f"circulant embedding for H={hurst}, n={n} has eigenvalue "
                f"{lo:.3e} < 0; pass allow_truncation=True to clip the spectrum "
                "(approximate law) or change the grid"
            )
    m = 2 * n
    z = np.empty(m, dtype=complex)
    z[0] = rng.standard_normal()
    if n >= 1:
        z[n] = rng.standard_normal()
    if n > 1:
        v = rng.standard_normal((n - 1, 2))
        z[1:n] = (v[:, 0] + 1j * v[:, 1]) / np.sqrt(2.0)
        z[n + 1:] = np.conj(z[1:n][::-1])
    return np.sqrt(m) * np.fft.ifft(np.sqrt(eig) * z).real[:n]


def gen_fbm(
    seed: int,
    hurst: float,
    t0: float,
    t1: float,
    dt: float,
    allow_truncation: bool = False,
) -> NoisePath:
    """Fractional Brownian path on [t0, t1], pinned to 0 at time 0.

    Increments have the exact fGn autocovariance
    0.5 (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) dt^{2H}, produced by circulant
    embedding, and the path is normalized to Var B_1 = 1.  The window must
    contain 0, which anchors the two-sided pinning convention.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"Hurst index must lie in (0,1), got {hurst}")
    if t0 > 0 or t1 < 0:
        raise ValueError("fbm windows must contain the pinning time 0")
    n = _step_count(t0, t1, dt)
    rng = make_rng(seed)
    inc = _fgn_davies_harte(rng, hurst, n, allow_truncation) * dt**hurst
    raw = np.zeros((n + 1, 1))
    np.cumsum(inc, out=raw[1:, 0])
    path = NoisePath(kind="fbm", dt=dt, raw=raw, origin=t0, seed=seed, hurst=hurst)
    return dataclasses.replace(path, base=path.index(0.0))


# -- binary path dump ---------------------------------------------------------


def dump_noise_path(path: NoisePath, f) -> None:
    """Write the path values to a binary stream.

    Layout: 32-byte header (magic "SYNCRDS1", n_samples and dim as uint32,
    dt and t_start as float64, little-endian) followed by the value matrix,
    row-major (time x component) float64.
    """
    f.write(_HEADER.pack(_MAGIC, path.n_samples, path.dim, path.dt, path.t_start))
    f.write(np.ascontiguousarray(path.values, dtype="<f8").tobytes())


def load_noise_path(f, kind: str = "brownian", pin_time: float | None = None) -> NoisePath:
    """Read a path written by :func:`dump_noise_path`.

    The header does not record the noise kind or anchor, so the caller supplies
    them; ``pin_time=None`` anchors at the first sample (Brownian convention),
    ``pin_time=0.0`` restores the fbm convention.
    """
    header = f.read(_HEADER.size)
    magic, n_samples, dim, dt, t_start = _HEADER.unpack(header)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a SYNCRDS1 path dump")
    data = np.frombuffer(f.read(n_samples * dim * 8), dtype="<f8").reshape(n_samples, dim)
    path = NoisePath(kind=kind, dt=dt, raw=data.astype(float), origin=t_start)
    if pin_time is not None:
        path = dataclasses.replace(path, base=path.index(pin_time))
    return path
