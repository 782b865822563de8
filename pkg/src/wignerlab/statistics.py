"""Semicircle references, Stieltjes transforms, the good set, gap and pair statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import CONVENTION_SCALE
from .spectra import SpectralSample


@dataclass(frozen=True)
class SemicircleRef:
    convention: str = "support2"
    a: float = 0.0

    def __post_init__(self):
        if self.convention not in CONVENTION_SCALE:
            raise ValueError(f"unknown convention {self.convention!r}")
        if self.a < 0:
            raise ValueError("a must be nonnegative")

    @property
    def radius(self) -> float:
        if self.convention == "support2":
            return 2.0 * math.sqrt(1.0 + self.a**2)
        return math.sqrt(1.0 + 4.0 * self.a**2)

    def density(self, x):
        R = self.radius
        x = np.asarray(x, dtype=float)
        return 2.0 / (math.pi * R * R) * np.sqrt(np.clip(R * R - x * x, 0.0, None))

    def cdf(self, x):
        R = self.radius
        s = np.clip(np.asarray(x, dtype=float) / R, -1.0, 1.0)
        return 0.5 + (s * np.sqrt(1.0 - s * s) + np.arcsin(s)) / math.pi

    def stieltjes(self, z):
        return stieltjes_semicircle(z, self)


def ref_for(sample: SpectralSample) -> SemicircleRef:
    return SemicircleRef(sample.convention, sample.a)


def semicircle_density(x, ref: SemicircleRef = SemicircleRef()):
    return ref.density(x)


def _require_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("Stieltjes transform requires Im z > 0")
    return z


def stieltjes_empirical(sample, z):
    """``(1/N) sum_j 1/(z - y_j)``; its imaginary part is negative for Im z > 0."""
    z = _require_upper(z)
    y = np.asarray(getattr(sample, "eigenvalues", sample), dtype=float)
    if y.size == 0:
        raise ValueError("empty sample")
    flat = z.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, 2_000_000 // y.size)
    for i in range(0, flat.size, step):
        out[i:i + step] = np.mean(1.0 / (flat[i:i + step, None] - y[None, :]), axis=1)
    return out.reshape(z.shape)


def stieltjes_semicircle(z, ref: SemicircleRef = SemicircleRef()):
    """Closed form of ``int rho(r) dr / (z - r)``.

    Equals ``(2/R^2)(z - sqrt(z-R) sqrt(z+R))`` with principal roots, a
    branch that behaves like ``z`` at infinity so the result decays like ``1/z``.
    """
    z = _require_upper(z)
    R = ref.radius
    # rationalized so that nothing cancels for large |z|
    return 2.0 / (z + np.sqrt(z - R) * np.sqrt(z + R))


@dataclass
class GoodSetReport:
    passed: bool
    worst_deviation: float
    worst_z: complex
    bounded: bool
    max_abs_eigenvalue: float


def in_good_set(sample: SpectralSample, eta: float, tol: float, K: float = 10.0,
                window: tuple | None = None, ref: SemicircleRef | None = None) -> GoodSetReport:
    """Membership in the good set: all ``|y_j| <= K`` and the Stieltjes transforms
    agree to ``tol`` on a grid of spacing ``eta/2`` over
    ``window x [eta, 1]``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    y = np.asarray(sample.eigenvalues, dtype=float)
    if y.size == 0:
        raise ValueError("empty sample")
    ref = ref or ref_for(sample)
    if window is None:
        window = (-ref.radius - 1.0, ref.radius + 1.0)
    h = eta / 2.0
    xs = np.arange(window[0], window[1] + 0.5 * h, h)
    ys = np.arange(eta, 1.0 + 0.5 * h, h)
    Z = xs[None, :] + 1j * ys[:, None]
    dev = np.abs(stieltjes_empirical(y, Z) - stieltjes_semicircle(Z, ref))
    idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[idx])
    ymax = float(np.max(np.abs(y)))
    bounded = ymax <= K
    return GoodSetReport(bool(bounded and worst <= tol), worst, complex(Z[idx]), bounded, ymax)


def semicircle_quantiles(N: int, ref: SemicircleRef = SemicircleRef("support1"),
                         tol: float = 1e-12) -> SpectralSample:
    """Points ``y_j`` with ``F(y_j) = (j - 1/2)/N`` by vectorized bisection."""
    if N < 2:
        raise ValueError("N must be at least 2")
    target = (np.arange(1, N + 1) - 0.5) / N
    R = ref.radius
    lo = np.full(N, -R)
    hi = np.full(N, R)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = ref.cdf(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    y = 0.5 * (lo + hi)
    # exact antisymmetry for a symmetric law
    y = 0.5 * (y - y[::-1])
    return SpectralSample(y, convention=ref.convention, a=ref.a)


# --------------------------------------------------------------------------
# Monte Carlo accumulation


@dataclass
class Accumulator:
    """Running (count, sum, sum of squares) with an associative merge."""

    count: int = 0
    total: float = 0.0
    sumsq: float = 0.0

    def add(self, x: float) -> "Accumulator":
        return self.merge(Accumulator(1, float(x), float(x) ** 2))

    def merge(self, other: "Accumulator") -> "Accumulator":
        return Accumulator(self.count + other.count, self.total + other.total,
                           self.sumsq + other.sumsq)

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else math.nan

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.nan
        var = (self.sumsq - self.count * self.mean**2) / (self.count - 1)
        return math.sqrt(max(var, 0.0) / self.count)


@dataclass
class GapEstimate:
    u: float
    s: float
    delta: float
    value: float
    M: int
    stderr: float
    count: int = 0
    low_count: bool = False


def gap_window(N: int, delta: float) -> float:
    return float(N) ** (-1.0 + delta)


def gap_statistic(sample, u: float, s: float, delta: float = 0.8,
                  ref: SemicircleRef | None = None) -> GapEstimate:
    """Density of close eigenvalue pairs near ``u``.

    Counts ``j`` with ``x_{j+1} - x_j <= s/(N rho(u))`` and
    ``|x_j - u| <= N^{-1+delta}`` and divides by ``2 N t_N rho(u)``.
    Ties count as close.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if s < 0:
        raise ValueError("s must be nonnegative")
    ref = ref or ref_for(sample)
    if abs(u) >= ref.radius:
        raise ValueError("u must lie inside the bulk of the spectrum")
    x = np.sort(np.asarray(getattr(sample, "eigenvalues", sample), dtype=float))
    N = x.size
    rho = float(ref.density(u))
    tN = gap_window(N, delta)
    gaps = np.diff(x)
    near = np.abs(x[:-1] - u) <= tN
    count = int(np.count_nonzero((gaps <= s / (N * rho)) & near)) if s > 0 else 0
    value = count / (2.0 * N * tN * rho)
    return GapEstimate(u, s, delta, value, 1, math.nan, count,
                       low_count=not np.any(np.abs(x - u) <= tN))


def merge_gap_estimates(estimates) -> GapEstimate:
    estimates = list(estimates)
    acc = Accumulator()
    for e in estimates:
        acc = acc.add(e.value)
    first = estimates[0]
    return GapEstimate(first.u, first.s, first.delta, acc.mean, acc.count, acc.stderr,
                       sum(e.count for e in estimates), any(e.low_count for e in estimates))


# --------------------------------------------------------------------------
# pair correlation


@dataclass
class CorrelationEstimate:
    u: float
    half_width: float
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    total_pairs: int
    out_of_range: int
    M: int
    empty: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def _pair_taus(x, u, half_width, scale):
    pts = x[np.abs(x - u) <= half_width]
    if pts.size < 2:
        return np.empty(0)
    i, j = np.triu_indices(pts.size, 1)
    return np.abs(pts[j] - pts[i]) * scale


def pair_correlation_estimate(samples, u: float = 0.0, tau_max: float = 3.0, bins: int = 12,
                              half_width: float | None = None,
                              ref: SemicircleRef | None = None,
                              N: int | None = None) -> CorrelationEstimate:
    """Histogram of rescaled distances ``tau = N rho(u) |x_i - x_j|``.

    Unordered pairs with both points inside ``[u - w, u + w]`` are counted.  A
    Poisson process of intensity ``N rho(u)`` has expected count
    ``int_bin (2A - tau) dtau`` per sample with ``A = N rho(u) w``; dividing
    by it gives a profile equal to 1 for Poisson and ``1 - sinc^2`` for GUE.
    ``N`` defaults to the size of the first sample; pass the nominal intensity
    for point processes whose size fluctuates.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    ref = ref or ref_for(samples[0])
    if abs(u) >= ref.radius:
        raise ValueError("u must lie inside the bulk")
    if N is None:
        N = len(np.asarray(getattr(samples[0], "eigenvalues", samples[0])))
    rho = float(ref.density(u))
    scale = N * rho
    if half_width is None:
        half_width = 40.0 / scale
    A = scale * half_width
    if tau_max >= 2 * A:
        raise ValueError("tau_max must be smaller than the window width in rescaled units")
    edges = np.linspace(0.0, tau_max, bins + 1)
    lo, hi = edges[:-1], edges[1:]
    expected = 2 * A * (hi - lo) - 0.5 * (hi**2 - lo**2)
    per_sample = np.empty((len(samples), bins))
    counts = np.zeros(bins, dtype=np.int64)
    total = out = 0
    for i, smp in enumerate(samples):
        x = np.sort(np.asarray(getattr(smp, "eigenvalues", smp), dtype=float))
        taus = _pair_taus(x, u, half_width, scale)
        c, _ = np.histogram(taus, bins=edges)
        counts += c
        total += taus.size
        out += int(taus.size - c.sum())
        per_sample[i] = c / expected
    M = len(samples)
    if total == 0:
        nan = np.full(bins, np.nan)
        return CorrelationEstimate(u, half_width, edges, counts, nan, nan, 0, 0, M, empty=True)
    dens = per_sample.mean(axis=0)
    err = per_sample.std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.full(bins, np.nan)
    return CorrelationEstimate(u, half_width, edges, counts, dens, err, total, out, M,
                               meta={"A": A, "rho": rho, "N": N})


def poisson_sample(N: int, ref: SemicircleRef, seed: int) -> SpectralSample:
    """Poisson point process with intensity ``N rho(x)`` (semicircle shape)."""
    rng = np.random.default_rng(seed)
    n = rng.poisson(N)
    x = ref.radius * (2.0 * rng.beta(1.5, 1.5, size=n) - 1.0)
    return SpectralSample(np.sort(x), convention=ref.convention, seed=seed, a=ref.a)


def empirical_cdf_distance(samples, ref: SemicircleRef) -> float:
    """Sup distance between the pooled empirical CDF and the semicircle CDF."""
    x = np.sort(np.concatenate([np.asarray(getattr(s, "eigenvalues", s)) for s in samples]))
    n = x.size
    F = ref.cdf(x)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(F - lower))))
