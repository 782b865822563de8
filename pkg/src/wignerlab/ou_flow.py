"""Ornstein-Uhlenbeck generator, semigroup and approximate time reversal.

The generator ``L = (1/4) d^2/dx^2 - (x/2) d/dx`` is diagonal in the
orthonormal Hermite basis of ``L^2(mu)``, ``mu = exp(-x^2) dx / sqrt(pi)``:
``L h_k = -(k/2) h_k``.  Densities are stored as coefficient vectors in
that basis, so every flow operation is an exact per-mode multiplication.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammainc, roots_hermite

from .ensemble import CONVENTION_SCALE, WignerMatrix, gue
from .errors import ConvergenceError, ProjectionError

DEFAULT_K = 64
TAIL_WARN = 1e-12
GRID = np.linspace(-8.0, 8.0, 2001)
NEG_TOL = -1e-12
SQRT_PI = math.sqrt(math.pi)


def hermite_functions(x, K: int) -> np.ndarray:
    """Rows ``h_0(x) .. h_K(x)`` of the orthonormal Hermite polynomials."""
    x = np.asarray(x, dtype=float)
    out = np.empty((K + 1,) + x.shape)
    out[0] = 1.0
    if K >= 1:
        out[1] = math.sqrt(2.0) * x
    for k in range(1, K):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def gauss_hermite(n: int):
    """Nodes and weights integrating against the normalized measure ``mu``."""
    x, w = roots_hermite(n)
    return x, w / SQRT_PI


@dataclass(frozen=True, eq=False)
class HermiteDensity:
    """Function ``sum_k coeffs[k] h_k(x / scale)``.

    ``scale = sqrt(2)`` represents a function of a diagonal entry, whose
    OU process has invariant measure ``exp(-x^2/2)``.
    """

    coeffs: np.ndarray
    probability: bool = False
    scale: float = 1.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty vector")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    @property
    def mass(self) -> float:
        return float(self.coeffs[0])

    def __call__(self, x):
        x = np.asarray(x, dtype=float) / self.scale
        return np.tensordot(self.coeffs, hermite_functions(x, self.K), axes=1)

    def _with(self, coeffs, probability=None):
        return replace(self, coeffs=coeffs,
                       probability=self.probability if probability is None else probability,
                       info={})

    def min_on_grid(self) -> float:
        return float(np.min(self(GRID * self.scale)))

    @classmethod
    def from_modes(cls, modes: dict, K: int | None = None, **kw) -> "HermiteDensity":
        K = max(modes) if K is None else K
        c = np.zeros(K + 1)
        for k, v in modes.items():
            c[k] = v
        return cls(c, **kw)


def hermite_project(density: Callable, K: int = DEFAULT_K, nodes: int | None = None,
                    probability: bool = False, scale: float = 1.0) -> HermiteDensity:
    """Project ``density`` (a function relative to ``mu``) on ``h_0..h_K``.

    Uses Gauss-Hermite quadrature with at least ``2K`` nodes.  The
    discrete L2(mu) reconstruction error is stored in ``info``.
    """
    n = max(2 * K, nodes or 0, 2 * K + 32)
    x, w = gauss_hermite(n)
    fx = np.asarray(density(x * scale), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ProjectionError("density is not finite at the quadrature nodes")
    H = hermite_functions(x, K)
    c = H @ (w * fx)
    recon = c @ H
    err = math.sqrt(float(np.sum(w * (fx - recon) ** 2)))
    norm = math.sqrt(float(np.sum(w * fx**2))) or 1.0
    tail = float(np.max(np.abs(c[-4:]))) if K >= 4 else 0.0
    if tail > 1e-3 * norm:
        raise ProjectionError(
            f"Hermite coefficients do not decay (tail {tail:.3g}); increase K or check growth"
        )
    if tail > TAIL_WARN * norm:
        warnings.warn(f"Hermite coefficient tail {tail:.3g} above {TAIL_WARN:g}", RuntimeWarning,
                      stacklevel=2)
    return HermiteDensity(c, probability=probability, scale=scale,
                          info={"l2_error": err, "tail": tail})


def _modes(d: HermiteDensity) -> np.ndarray:
    return np.arange(d.K + 1, dtype=float)


def apply_generator(d: HermiteDensity, power: int = 1) -> HermiteDensity:
    if power < 1:
        raise ValueError("power must be at least 1")
    return d._with(d.coeffs * (-0.5 * _modes(d)) ** power, probability=False)


def semigroup(d: HermiteDensity, t: float) -> HermiteDensity:
    """``exp(tL) d``; forward time only."""
    if t < 0:
        raise ValueError("t must be nonnegative; use reversal_approximant for backward flow")
    return d._with(d.coeffs * np.exp(-0.5 * t * _modes(d)))


def reversal_factors(K: int, t: float, m: int) -> np.ndarray:
    """Per-mode multipliers of ``sum_{j<m} (-tL)^j / j!``."""
    s = 0.5 * t * np.arange(K + 1, dtype=float)
    term = np.ones_like(s)
    total = np.ones_like(s)
    for j in range(1, m):
        term = term * s / j
        total = total + term
    return total


def reversal_approximant(d: HermiteDensity, t: float, m: int = 3) -> HermiteDensity:
    """Truncated backward flow ``(1 - tL + ... + (-tL)^{m-1}/(m-1)!) d``.

    The output is flagged as a probability density only when the input
    was one and the result is nonnegative on the check grid.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if m < 2:
        raise ValueError("order m must be at least 2")
    out = d._with(d.coeffs * reversal_factors(d.K, t, m), probability=False)
    if d.probability:
        nonneg = out.min_on_grid() >= NEG_TOL
        out = replace(out, probability=nonneg, info={"nonnegative": nonneg})
    return out


def roundtrip_defect(d: HermiteDensity, t: float, m: int) -> np.ndarray:
    """Coefficients of ``exp(tL) G_t d - d`` computed without cancellation.

    Per mode the factor is ``exp(-s) sum_{j<m} s^j/j! - 1 = -P(m, s)`` with
    ``P`` the regularized lower incomplete gamma function and ``s = tk/2``.
    """
    s = 0.5 * t * _modes(d)
    return -d.coeffs * gammainc(m, s)


def reversal_error_chi2(d: HermiteDensity, t: float, m: int = 3, nodes: int | None = None) -> float:
    """``int (v_t - v)^2 / v_t dmu`` with ``v_t = exp(tL) G_t v``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    delta = roundtrip_defect(d, t, m)
    vt = d.coeffs + delta
    n = nodes or max(4 * d.K + 64, 160)
    x, w = gauss_hermite(n)
    H = hermite_functions(x, d.K)
    vt_x = vt @ H
    grid_min = float(np.min(vt @ hermite_functions(GRID, d.K)))
    if np.min(vt_x) <= 0 or grid_min <= 0:
        raise ValueError("round-trip density is not positive; chi-square undefined")
    diff = delta @ H
    return float(np.sum(w * diff**2 / vt_x))


@dataclass(frozen=True)
class FlowBounds:
    A1: float
    A2: float
    A3: float


def flow_bounds(d: HermiteDensity, grid: np.ndarray = GRID) -> FlowBounds:
    """Grid estimates of ``sup Lv/v``, ``sup -L^2 v/v`` and ``sup |L^3 v|/v``.

    These are sups over a finite grid, not certified bounds.
    """
    x = np.asarray(grid, dtype=float)
    v = d(x * d.scale)
    if np.min(v) <= 0:
        raise ValueError("density must be strictly positive on the grid")
    L1 = apply_generator(d, 1)(x * d.scale)
    L2 = apply_generator(d, 2)(x * d.scale)
    L3 = apply_generator(d, 3)(x * d.scale)
    return FlowBounds(
        max(0.0, float(np.max(L1 / v))),
        max(0.0, float(np.max(-L2 / v))),
        float(np.max(np.abs(L3) / v)),
    )


# --------------------------------------------------------------------------
# cutoff potential


def smooth_cutoff(x):
    """Degree-7 smoothstep plateau: 1 on [-1, 1], 0 outside [-2, 2]."""
    s = np.clip(np.abs(np.asarray(x, dtype=float)) - 1.0, 0.0, 1.0)
    return 1.0 - s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)


def cutoff_potential(V: Callable, N: float, lam: float, k: int, tol: float = 1e-12):
    """Solve for ``(c_N, d_N)`` so ``exp(-V_c)`` is a centered density w.r.t. ``mu``.

    ``V_c(x) = V(x) * theta((x - c_N) N^{-lam/(4k)}) + d_N``.  Returns
    ``(V_c, c_N, d_N)``.
    """
    width = float(N) ** (lam / (4.0 * k))

    def Vc_of(c, dN):
        return lambda x: V(x) * smooth_cutoff((np.asarray(x, dtype=float) - c) / width) + dN

    def moments(c, dN):
        Vc = Vc_of(c, dN)
        f0 = lambda x: math.exp(-float(Vc(np.array([x]))[0]) - x * x) / SQRT_PI  # noqa: E731
        pts = sorted({c - 2 * width, c - width, 0.0, c + width, c + 2 * width})
        pts = [p for p in pts if -30 < p < 30]
        m0 = m1 = 0.0
        edges = [-30.0, *pts, 30.0]
        for a, b in zip(edges[:-1], edges[1:]):
            m0 += integrate.quad(f0, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
            m1 += integrate.quad(lambda x: x * f0(x), a, b, epsabs=1e-15, epsrel=1e-13,
                                 limit=200)[0]
        return m0, m1

    def residual(p):
        m0, m1 = moments(*p)
        return [m0 - 1.0, m1]

    r0 = residual([0.0, 0.0])
    if max(abs(r0[0]), abs(r0[1])) < tol:
        return Vc_of(0.0, 0.0), 0.0, 0.0
    probe = np.linspace(0.0, 4 * width, 257)
    if np.allclose(V(probe), V(-probe), rtol=1e-12, atol=1e-14):
        # even V: the centering condition holds with c = 0, only d is free
        m0 = r0[0] + 1.0
        dN = math.log(m0)
        res = residual([0.0, dN])
        if abs(res[0]) > 1e-10:
            dN = optimize.brentq(lambda d: residual([0.0, d])[0], dN - 1e-3, dN + 1e-3, xtol=1e-16)
        return Vc_of(0.0, dN), 0.0, float(dN)
    sol = optimize.root(residual, [0.0, 0.0], method="hybr", options={"xtol": 1e-14})
    res = residual(sol.x)
    if max(abs(res[0]), abs(res[1])) > 1e-10:
        raise ConvergenceError(f"cutoff root finder failed; residuals {res}")
    c, dN = map(float, sol.x)
    if abs(c) > width:
        # the window moved off V entirely: V itself is far from centered
        raise ConvergenceError(f"cutoff centre {c:.4g} left the window of width {width:.4g}; "
                               "V must be close to a normalized, centered potential")
    return Vc_of(c, dN), c, dN


# --------------------------------------------------------------------------
# matrix-level flow


def matrix_ou_step(H: WignerMatrix, t: float, seed: int) -> WignerMatrix:
    """Exact OU transition ``exp(-t/2) H + sqrt(1 - exp(-t)) V``.

    ``V`` is a fresh GUE matrix in the convention of ``H`` (scaled by
    ``sqrt(1 + a^2)`` for a deformed input) so entry means and variances are
    stationary.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return H
    V = gue(H.N, H.convention, seed).entries
    if H.a:
        V = V * math.sqrt(1.0 + H.a**2)
    out = math.exp(-0.5 * t) * H.entries + math.sqrt(-math.expm1(-t)) * V
    return WignerMatrix(out, H.convention, seed, H.a)


def write_coefficients(path, d: HermiteDensity) -> None:
    with open(path, "w") as fh:
        fh.write(f"K={d.K}\n")
        for c in d.coeffs:
            fh.write(f"{float(c)!r}\n")


def read_coefficients(path, **kw) -> HermiteDensity:
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("K="):
            raise ValueError("coefficient file must start with a 'K=' header")
        K = int(head[2:])
        vals = [float(line) for line in fh if line.strip()]
    if len(vals) != K + 1:
        raise ValueError(f"expected {K + 1} coefficients, found {len(vals)}")
    return HermiteDensity(np.array(vals), **kw)


__all__ = [
    "CONVENTION_SCALE", "FlowBounds", "HermiteDensity", "apply_generator", "cutoff_potential",
    "flow_bounds", "gauss_hermite", "hermite_functions", "hermite_project", "matrix_ou_step",
    "read_coefficients", "reversal_approximant", "reversal_error_chi2", "semigroup",
    "smooth_cutoff", "write_coefficients",
]
