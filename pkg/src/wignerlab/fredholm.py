"""Sine-kernel reference quantities: gap probabilities and determinantal correlations."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import NumericalError

DEFAULT_ORDER = 40
STEP = 1e-3


def sine_kernel(tau):
    """``sin(pi tau)/(pi tau)`` with the removable singularity filled in."""
    tau = np.asarray(tau, dtype=float)
    x = np.pi * tau
    small = np.abs(tau) < 1e-4
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0 + x**4 / 120.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SineKernelOp:
    """Sine kernel restricted to ``(0, alpha)``, discretized on Gauss-Legendre nodes."""

    alpha: float
    n: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.n < 10:
            raise ValueError("quadrature order must be at least 10")

    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n)
        return 0.5 * self.alpha * (x + 1.0), 0.5 * self.alpha * w

    def matrix(self):
        x, w = self.nodes()
        sw = np.sqrt(w)
        return sw[:, None] * sine_kernel(x[:, None] - x[None, :]) * sw[None, :]

    def det(self) -> float:
        if self.alpha == 0:
            return 1.0
        return float(np.linalg.det(np.eye(self.n) - self.matrix()))


def fredholm_det(alpha: float, n: int = DEFAULT_ORDER) -> float:
    """``det(1 - K_alpha)``: probability that ``(0, alpha)`` holds no point of the sine process."""
    return SineKernelOp(float(alpha), n).det()


def _d2(alpha, h, n):
    return (fredholm_det(alpha + h, n) - 2 * fredholm_det(alpha, n) + fredholm_det(alpha - h, n)) / h**2


def _d1(alpha, h, n):
    return (fredholm_det(alpha + h, n) - fredholm_det(alpha - h, n)) / (2 * h)


def gap_density(alpha: float, h: float = STEP, n: int = DEFAULT_ORDER) -> float:
    """Second derivative of the gap probability, one Richardson level on top of central differences."""
    if not h > 1e-8:
        raise NumericalError(f"difference step {h} too small")
    if alpha <= 2 * h:
        raise ValueError(f"alpha must exceed {2 * h}")
    return (4 * _d2(alpha, h / 2, n) - _d2(alpha, h, n)) / 3


def gap_integral(s: float, h: float = STEP, n: int = DEFAULT_ORDER) -> float:
    """``int_0^s p``, which equals ``1 + d/ds det(1 - K_s)`` since the slope at 0 is -1."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 0.0
    if s <= h:
        h = s / 4
    return 1.0 + (4 * _d1(s, h / 2, n) - _d1(s, h, n)) / 3


def determinantal_correlation(points) -> float:
    """``det(sinc(a_i - a_j))``, the limiting k-point correlation."""
    a = np.atleast_1d(np.asarray(points, dtype=float))
    if a.size == 0:
        raise ValueError("need at least one point")
    return float(np.linalg.det(sine_kernel(a[:, None] - a[None, :])))


@dataclass
class SeriesResult:
    value: float
    terms: list
    remainder: float


def _series_term(s: float, m: int, n: int) -> float:
    # integral over [0,s]^{m-1} of det(sinc(a_i - a_j)) with a_1 = 0
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * s * (x + 1.0)
    w = 0.5 * s * w
    total = 0.0
    grids = np.array(list(product(range(n), repeat=m - 1)), dtype=np.intp)
    for chunk in np.array_split(grids, max(1, grids.shape[0] // 20000)):
        pts = np.concatenate([np.zeros((chunk.shape[0], 1)), x[chunk]], axis=1)
        mats = sine_kernel(pts[:, :, None] - pts[:, None, :])
        total += float(np.sum(np.linalg.det(mats) * np.prod(w[chunk], axis=1)))
    return total


def series_gap_integral(s: float, M: int = 5, n: int | None = None) -> SeriesResult:
    """Inclusion-exclusion expansion of ``int_0^s p`` truncated after ``M`` terms.

    The remainder estimate is the magnitude of the last included term.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if not 2 <= M <= 6:
        raise ValueError("M must lie in [2, 6]")
    if n is None:
        n = {2: 40, 3: 30, 4: 18, 5: 12, 6: 10}[M]
    terms = []
    for m in range(2, M + 1):
        sign = 1.0 if m % 2 == 0 else -1.0
        terms.append(sign / math.factorial(m - 1) * _series_term(s, m, n) if s > 0 else 0.0)
    return SeriesResult(float(sum(terms)), terms, abs(terms[-1]))


def fredholm_table(alpha_max: float = 4.0, step: float = 0.05, n: int = DEFAULT_ORDER):
    """Rows ``(alpha, det, p, int p)`` on ``0, step, ..., alpha_max``."""
    if step <= 0 or alpha_max < 0:
        raise ValueError("need step > 0 and alpha_max >= 0")
    count = int(round(alpha_max / step)) + 1
    rows = []
    for k in range(count):
        a = k * step
        p = gap_density(a, n=n) if a > 2 * STEP else (0.0 if a == 0 else math.pi**2 * a * a / 3)
        rows.append((a, fredholm_det(a, n), p, gap_integral(a, n=n)))
    return rows


def write_table_csv(path, rows, meta: dict | None = None):
    with open(path, "w", newline="") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["alpha", "det", "p", "int_p"])
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
