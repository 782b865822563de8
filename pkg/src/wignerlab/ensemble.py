"""Entry laws, their validation, and Hermitian Wigner matrix sampling.

Two variance conventions are used throughout:

``support2``
    off-diagonal real/imaginary parts have variance 1/2 and the diagonal
    variance 1; the spectrum fills [-2, 2].
``support1``
    everything scaled by 1/2 (variance 1/8 and 1/4); the spectrum fills
    [-1, 1].  Adding ``a`` times a standard GUE widens it to
    [-sqrt(1+4a^2), sqrt(1+4a^2)].

The Gaussian reference measure ``mu`` is ``exp(-x^2) dx / sqrt(pi)``, a
probability measure, so the constant function 1 is a density w.r.t. ``mu``.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator
from scipy.special import ndtri

from .rng import open_uniforms

TAIL_CLASSES = ("gaussian_dominated", "exponential", "compact")
CONVENTION_SCALE = {"support2": 1.0, "support1": 0.5}
SQRT_PI = math.sqrt(math.pi)


def convention_scale(src: str, dst: str) -> float:
    """Factor converting entries (and eigenvalues) from ``src`` to ``dst``."""
    try:
        return CONVENTION_SCALE[dst] / CONVENTION_SCALE[src]
    except KeyError as exc:
        raise ValueError(f"unknown convention {exc.args[0]!r}") from None


def _check_convention(convention):
    if convention not in CONVENTION_SCALE:
        raise ValueError(f"unknown convention {convention!r}")


def _quad(f, lo, hi, points=()):
    """Adaptive quadrature over (lo, hi), split at interior break points."""
    cuts = sorted({p for p in points if lo < p < hi})
    edges = [lo, *cuts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, limit=400, epsabs=1e-15, epsrel=1e-13)
        total += val
    return total


@dataclass(frozen=True, eq=False)
class EntryLaw:
    """A one-dimensional law ``nu(dx) = exp(-U(x)) dx`` for a matrix entry.

    ``derivative(x, j)`` returns the j-th derivative of ``U`` (None when the
    potential is not smooth).  ``quantile`` is an optional closed-form
    inverse CDF; otherwise a table built from quadrature is used.
    """

    name: str
    potential: Callable[[np.ndarray], np.ndarray]
    tail_class: str
    variance: float
    mean: float = 0.0
    support: tuple = (-math.inf, math.inf)
    derivative: Callable[[np.ndarray, int], np.ndarray] | None = None
    closed_quantile: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tail_class not in TAIL_CLASSES:
            raise ValueError(f"unknown tail class {self.tail_class!r}")
        if not self.variance > 0:
            raise ValueError("variance must be positive")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            vals = np.exp(-self.potential(x[inside]))
        out[inside] = vals
        return out

    @cached_property
    def range(self) -> tuple[float, float]:
        """Finite interval holding all but ~1e-16 of the mass."""
        lo, hi = self.support
        if math.isfinite(lo) and math.isfinite(hi):
            return lo, hi
        sd = math.sqrt(self.variance)
        u0 = float(np.min(self.potential(np.linspace(-sd, sd, 201))))

        def reach(sign, edge):
            if math.isfinite(edge):
                return edge
            x = sd
            while float(self.potential(np.array([sign * x]))[0]) - u0 < 42.0:
                x *= 1.25
                if x > 1e4:
                    raise ValueError(f"law {self.name!r} has no usable tail decay")
            return sign * x

        return reach(-1.0, lo), reach(1.0, hi)

    @cached_property
    def _table(self):
        lo, hi = self.range
        nodes, weights = np.polynomial.legendre.leggauss(8)
        grid = np.linspace(lo, hi, 8193)
        if lo < 0.0 < hi:
            grid = np.unique(np.concatenate([grid, [0.0]]))
        a, b = grid[:-1], grid[1:]
        half = 0.5 * (b - a)
        pts = (0.5 * (a + b))[:, None] + half[:, None] * nodes[None, :]
        cell = (self.density(pts) * weights[None, :]).sum(axis=1) * half
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        cdf /= cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return PchipInterpolator(cdf[keep], grid[keep], extrapolate=False)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if self.closed_quantile is not None:
            return self.closed_quantile(u)
        x = self._table(u)
        lo, hi = self.range
        return np.nan_to_num(x, nan=0.0, posinf=hi, neginf=lo)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.quantile(rng.uniform(size=size))

    def sample_rejection(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform-envelope rejection sampler; independent of the CDF table."""
        lo, hi = self.range
        xs = np.linspace(lo, hi, 20001)
        fmax = 1.05 * float(self.density(xs).max())
        out = np.empty(0)
        while out.size < size:
            x = rng.uniform(lo, hi, size=2 * size)
            keep = rng.uniform(size=2 * size) * fmax < self.density(x)
            out = np.concatenate([out, x[keep]])
        return out[:size]

    def scaled(self, factor: float) -> "EntryLaw":
        """Law of ``factor * X``."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        s = float(factor)
        U, dU, q = self.potential, self.derivative, self.closed_quantile
        lo, hi = self.support
        return replace(
            self,
            potential=lambda x: U(np.asarray(x) / s) + math.log(s),
            derivative=None if dU is None else (lambda x, j: dU(np.asarray(x) / s, j) / s**j),
            closed_quantile=None if q is None else (lambda u: s * q(u)),
            variance=self.variance * s * s,
            mean=self.mean * s,
            support=(lo * s, hi * s),
            params={**self.params, "scale": self.params.get("scale", 1.0) * s},
        )

    def with_variance(self, variance: float) -> "EntryLaw":
        return self.scaled(math.sqrt(variance / self.variance))

    @classmethod
    def from_density(cls, name, density, support=(-math.inf, math.inf),
                     tail_class="gaussian_dominated", points=(0.0,), params=None):
        """Build a law from an (already normalized) density function."""
        lo, hi = support

        def f(x):
            return float(density(np.array([x]))[0])

        mean = _quad(lambda x: x * f(x), lo, hi, points)
        var = _quad(lambda x: (x - mean) ** 2 * f(x), lo, hi, points)

        def U(x):
            with np.errstate(divide="ignore"):
                return -np.log(density(np.asarray(x, dtype=float)))

        return cls(name, U, tail_class, var, mean=mean, support=support, params=dict(params or {}))


def _polynomial_law(name, coeffs, tail_class, params):
    """Law with potential ``P(x) + log Z`` for a polynomial ``P``."""
    P = Polynomial(coeffs)
    mass = _quad(lambda x: math.exp(-P(x)), -math.inf, math.inf, (0.0,))
    logZ = math.log(mass)
    var = _quad(lambda x: x * x * math.exp(-P(x) - logZ), -math.inf, math.inf, (0.0,))
    derivs = {j: P.deriv(j) for j in range(1, 7)}

    def U(x):
        return P(np.asarray(x, dtype=float)) + logZ

    def dU(x, j):
        return derivs[j](np.asarray(x, dtype=float)) if j <= 6 else P.deriv(j)(x)

    return EntryLaw(name, U, tail_class, var, derivative=dU, params=params)


def gaussian_law(variance: float = 0.5) -> EntryLaw:
    """Centered Gaussian; ``variance=1/2`` gives ``U(x) = x^2 + log(sqrt(pi))``."""
    v = float(variance)
    if not v > 0:
        raise ValueError("variance must be positive")
    sd = math.sqrt(v)
    const = 0.5 * math.log(2 * math.pi * v)
    return EntryLaw(
        "gaussian",
        lambda x: np.asarray(x, dtype=float) ** 2 / (2 * v) + const,
        "gaussian_dominated",
        v,
        derivative=lambda x, j: (np.asarray(x, dtype=float) / v if j == 1
                                 else np.full(np.shape(x), 1 / v if j == 2 else 0.0)),
        closed_quantile=lambda u: sd * ndtri(u),
        params={"potential": "gaussian", "variance": v},
    )


def quartic_law(g: float = 0.1, quadratic: float = 1.0, variance: float | None = None) -> EntryLaw:
    """``U(x) = quadratic*x^2 + g*x^4 + const``, optionally rescaled to ``variance``."""
    if g < 0 or quadratic < 0 or (g == 0 and quadratic == 0):
        raise ValueError("quartic potential must be confining")
    law = _polynomial_law("quartic", [0.0, 0.0, quadratic, 0.0, g], "gaussian_dominated",
                          {"potential": "quartic", "g": g, "quadratic": quadratic})
    if variance is not None:
        law = law.with_variance(variance)
        law.params["variance"] = variance
    return law


def bump_law(power: int = 9, variance: float | None = None) -> EntryLaw:
    """Density proportional to ``(1 - x^2)^power`` on [-1, 1]."""
    p = float(power)
    if p <= 0:
        raise ValueError("power must be positive")
    logZ = math.log(math.sqrt(math.pi) * math.gamma(p + 1) / math.gamma(p + 1.5))
    var = 1.0 / (2 * p + 3)

    def U(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -p * np.log1p(-x * x) + logZ

    def dU(x, j):
        x = np.asarray(x, dtype=float)
        return p * math.factorial(j - 1) * ((1 - x) ** (-j) + (-1) ** j * (1 + x) ** (-j))

    law = EntryLaw("bump", U, "compact", var, support=(-1.0, 1.0), derivative=dU,
                   params={"potential": "bump", "power": power})
    if variance is not None:
        law = law.with_variance(variance)
        law.params["variance"] = variance
    return law


def two_sided_exponential_law(rate: float = 2.0) -> EntryLaw:
    """Density ``(rate/2) exp(-rate |x|)``; variance ``2 / rate^2``."""
    r = float(rate)
    if not r > 0:
        raise ValueError("rate must be positive")

    def q(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < 0.5, np.log(2 * u) / r, -np.log(2 * (1 - u)) / r)

    return EntryLaw(
        "two_sided_exponential",
        lambda x: r * np.abs(np.asarray(x, dtype=float)) - math.log(r / 2),
        "exponential",
        2.0 / r**2,
        closed_quantile=q,
        params={"potential": "two_sided_exponential", "rate": r},
    )


BUILTIN_LAWS = {
    "gaussian": gaussian_law,
    "quartic": quartic_law,
    "bump": bump_law,
    "two_sided_exponential": two_sided_exponential_law,
}


def law_from_config(cfg: dict) -> EntryLaw:
    """Build a law from ``{"potential": name, **parameters}``."""
    cfg = dict(cfg)
    name = cfg.pop("potential", None)
    if name not in BUILTIN_LAWS:
        raise ValueError(f"unknown potential {name!r}; expected one of {sorted(BUILTIN_LAWS)}")
    variance = cfg.pop("variance", None)
    if name == "gaussian":
        return gaussian_law(0.5 if variance is None else float(variance))
    if name == "two_sided_exponential":
        law = two_sided_exponential_law(float(cfg.get("rate", 2.0)))
        return law if variance is None else law.with_variance(float(variance))
    if name == "quartic":
        return quartic_law(float(cfg.get("g", 0.1)), float(cfg.get("quadratic", 1.0)),
                           None if variance is None else float(variance))
    return bump_law(int(cfg.get("power", 9)), None if variance is None else float(variance))


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    normalization: float
    mean: float
    variance: float
    normalized: bool
    mean_zero: bool
    variance_ok: bool
    derivative_growth_ok: bool | None
    growth_exponent: float | None
    tail_ok: bool
    messages: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.normalized and self.mean_zero and self.variance_ok and self.tail_ok
                and self.derivative_growth_ok is not False)


def _moment_quad(law, fn):
    lo, hi = law.support
    points = [0.0]
    if not math.isfinite(lo) or not math.isfinite(hi):
        a, b = law.range if _has_range(law) else (-10.0, 10.0)
        points += [a, b]
    return _quad(fn, lo, hi, points)


def _has_range(law):
    try:
        law.range
    except ValueError:
        return False
    return True


def validate_law(law: EntryLaw, k: int = 3, radius: float = 40.0) -> ValidationReport:
    """Check normalization, centering, variance, derivative growth and tail decay.

    A non-normalizable potential is reported as a failure; a potential that
    evaluates to NaN is rejected with ``ValueError``.
    """
    lo, hi = law.support
    probe = np.linspace(max(lo, -radius), min(hi, radius), 4001)[1:-1]
    if np.any(np.isnan(law.potential(probe))):
        raise ValueError(f"potential of {law.name!r} evaluates to NaN")
    msgs = []

    def f(x):
        with np.errstate(over="ignore"):
            return float(law.density(np.array([x]))[0])

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            mass = _moment_quad(law, f)
            mean = _moment_quad(law, lambda x: x * f(x))
            second = _moment_quad(law, lambda x: x * x * f(x))
        except (integrate.IntegrationWarning, OverflowError, ValueError) as exc:
            msgs.append(f"quadrature failed: {exc}")
            mass, mean, second = math.inf, math.nan, math.nan
    if not math.isfinite(mass):
        return ValidationReport(mass, math.nan, math.nan, False, False, False, None, None,
                                False, msgs + ["law is not normalizable"])
    normalized = abs(mass - 1.0) < 1e-10
    if not normalized:
        msgs.append(f"total mass {mass!r} differs from 1")
    var = second / mass - (mean / mass) ** 2
    mean_zero = abs(mean) < 1e-9
    variance_ok = abs(second - law.variance) < 1e-8

    growth_ok, exponent = None, None
    if law.derivative is not None:
        lo_i = lo + 1e-6 if math.isfinite(lo) else -radius
        hi_i = hi - 1e-6 if math.isfinite(hi) else radius
        edge = min(abs(lo_i), abs(hi_i))
        xs = np.array([-edge, -edge / 2, edge / 2, edge])
        with np.errstate(all="ignore"):
            S = sum(np.abs(law.derivative(xs, j)) for j in range(1, 7))
        outer = max(S[0], S[3])
        inner = max(S[1], S[2], 1e-300)
        if np.all(np.isfinite(S)) and outer > 0:
            exponent = math.log(outer / inner) / math.log((1 + edge**2) / (1 + edge**2 / 4))
        else:
            exponent = math.inf
        growth_ok = bool(exponent <= k + 1e-9) and edge >= 4.0
        if not growth_ok:
            msgs.append(f"derivative growth exponent {exponent:.3g} exceeds (1+x^2)^{k}")

    if law.tail_class == "compact":
        tail_ok = math.isfinite(lo) and math.isfinite(hi)
    else:
        u0 = float(np.min(law.potential(probe[np.abs(probe) < 1.0])))
        R = radius
        half = np.array([-R / 2, R / 2])
        full = np.array([-R, R])
        power = 2.0 if law.tail_class == "gaussian_dominated" else 1.0
        rate_half = np.min((law.potential(half) - u0) / np.abs(half) ** power)
        rate_full = np.min((law.potential(full) - u0) / np.abs(full) ** power)
        tail_ok = bool(rate_full > 0 and rate_full >= 0.75 * rate_half)
    if not tail_ok:
        msgs.append(f"tail bound for class {law.tail_class!r} not satisfied")
    return ValidationReport(mass, mean, var, normalized, mean_zero, variance_ok,
                            growth_ok, exponent, tail_ok, msgs)


# --------------------------------------------------------------------------
# truncation and compact-support mixture


def truncate_law(law: EntryLaw, ell: float) -> EntryLaw:
    """Restrict to [-ell, ell] after shifting by ``a`` so the result is centered.

    The returned law carries the shift and the retained mass in
    ``params["a_ell"]`` and ``params["Z_ell"]``.
    """
    if not ell > 0:
        raise ValueError("ell must be positive")
    iqr = float(law.quantile(np.array([0.75]))[0] - law.quantile(np.array([0.25]))[0])
    if ell < iqr:
        raise ValueError(f"ell={ell} below the interquartile scale {iqr:.4g}: degenerate truncation")
    lo, hi = law.support

    def window(a):
        return max(-ell, lo - a), min(ell, hi - a)

    def first_moment(a):
        a0, b0 = window(a)
        return _quad(lambda x: x * float(law.density(np.array([x + a]))[0]), a0, b0, (-a,))

    probe = np.linspace(0.0, ell, 257)
    # libm power is not always bitwise even, hence the tolerance
    symmetric = np.allclose(law.potential(probe), law.potential(-probe), rtol=1e-12, atol=1e-14)
    if symmetric:
        a_ell = 0.0
    else:
        span = 0.5 * ell
        a_ell = optimize.brentq(first_moment, -span, span, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    a0, b0 = window(a_ell)
    Z = _quad(lambda x: float(law.density(np.array([x + a_ell]))[0]), a0, b0, (-a_ell,))
    logZ = math.log(Z)
    U = law.potential

    def Ut(x):
        return U(np.asarray(x, dtype=float) + a_ell) + logZ

    dU = law.derivative
    var = _quad(lambda x: x * x * math.exp(-float(Ut(np.array([x]))[0])), a0, b0, (-a_ell, 0.0))
    return EntryLaw(
        f"{law.name}_truncated",
        Ut,
        "compact",
        var,
        support=(a0, b0),
        derivative=None if dU is None else (lambda x, j: dU(np.asarray(x) + a_ell, j)),
        params={**law.params, "ell": ell, "a_ell": a_ell, "Z_ell": Z},
    )


def bump_mixture(u: Callable, tau: float, m: int) -> EntryLaw:
    """Law with density ``(tau^m + u) / (1 + tau^m)`` relative to ``mu``.

    ``u`` is a density with respect to the normalized Gaussian measure
    ``mu``; the floor ``tau^m`` gives the result Gaussian tails.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if m < 2:
        raise ValueError("m must be at least 2")
    gauss = lambda x: np.exp(-np.asarray(x, dtype=float) ** 2) / SQRT_PI  # noqa: E731
    mass = _quad(lambda x: float(u(np.array([x]))[0] * gauss(x)), -math.inf, math.inf,
                 (-1.0, 0.0, 1.0))
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"u must integrate to 1 against mu (got {mass:.8g})")
    floor = tau**m

    def q(x):
        return (floor + u(x)) / (1.0 + floor)

    law = EntryLaw.from_density(
        "bump_mixture",
        lambda x: q(x) * gauss(x),
        points=(-1.0, 0.0, 1.0),
        params={"tau": tau, "m": m},
    )
    return replace(law, params={**law.params, "relative_density": q})


# --------------------------------------------------------------------------
# matrices


@dataclass(frozen=True, eq=False)
class WignerMatrix:
    entries: np.ndarray
    convention: str = "support2"
    seed: int | None = None
    a: float = 0.0

    @property
    def N(self) -> int:
        return self.entries.shape[0]


def _check_variance(law, expected, what):
    if abs(law.variance - expected) > 1e-6 * expected:
        raise ValueError(f"{what} variance {law.variance:.8g} inconsistent with convention "
                         f"(expected {expected:.8g})")


def sample_wigner(N: int, off_diag: EntryLaw, diag: EntryLaw,
                  convention: str = "support2", seed: int = 0) -> WignerMatrix:
    """Hermitian matrix ``h = N^{-1/2} z`` with i.i.d. entries above the diagonal.

    Entry ``(row, col)`` is driven by counter position ``(row, col)`` of a
    Philox stream keyed by ``seed``, so the result never depends on the
    order in which entries are generated.
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    N = int(N)
    _check_convention(convention)
    s2 = CONVENTION_SCALE[convention] ** 2
    _check_variance(off_diag, 0.5 * s2, "off-diagonal")
    _check_variance(diag, 1.0 * s2, "diagonal")
    U = open_uniforms(seed, 0, (N, N, 2))
    iu = np.triu_indices(N, 1)
    z = off_diag.quantile(U[..., 0][iu]) + 1j * off_diag.quantile(U[..., 1][iu])
    idx = np.arange(N)
    H = np.zeros((N, N), dtype=complex)
    H[iu] = z
    H[iu[1], iu[0]] = np.conj(z)
    H[idx, idx] = diag.quantile(U[idx, idx, 0])
    H /= math.sqrt(N)
    return WignerMatrix(H, convention, seed)


def gue(N: int, convention: str = "support2", seed: int = 0) -> WignerMatrix:
    s2 = CONVENTION_SCALE[convention] ** 2
    return sample_wigner(N, gaussian_law(0.5 * s2), gaussian_law(s2), convention, seed)


def sample_from_law(N: int, law: EntryLaw, convention: str = "support2", seed: int = 0) -> WignerMatrix:
    """Wigner matrix whose entries all follow ``law`` rescaled to the convention's variances."""
    s2 = CONVENTION_SCALE[convention] ** 2
    return sample_wigner(N, law.with_variance(0.5 * s2), law.with_variance(s2), convention, seed)


def sample_deformed(base: WignerMatrix, a: float, seed: int) -> WignerMatrix:
    """``base + a V`` with ``V`` an independent standard (support2) GUE matrix."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    H = np.asarray(base.entries)
    if np.abs(H - H.conj().T).max(initial=0.0) > 0:
        raise ValueError("base matrix is not Hermitian")
    if a == 0:
        return base
    V = gue(H.shape[0], "support2", seed).entries
    out = H + a * V
    out = np.triu(out) + np.triu(out, 1).conj().T
    out[np.diag_indices_from(out)] = out.diagonal().real
    # independent GUE deformations add in quadrature
    return WignerMatrix(out, base.convention, seed, math.hypot(base.a, a))


def rescale(H: WignerMatrix, convention: str) -> WignerMatrix:
    f = convention_scale(H.convention, convention)
    return WignerMatrix(H.entries * f, convention, H.seed, H.a)


# --------------------------------------------------------------------------
# matrix export: binary and CSV, row-major, interleaved re/im

MAGIC = b"WIGNERM1"
_CONV_CODE = {"support2": 2, "support1": 1}
_CODE_CONV = {v: k for k, v in _CONV_CODE.items()}


def write_matrix_binary(path, H: WignerMatrix) -> None:
    """Little-endian: magic, uint64 N, uint8 convention, int64 seed (-1 = none),
    float64 a, then N*N (re, im) float64 pairs row by row."""
    N = H.N
    seed = -1 if H.seed is None else int(np.int64(np.uint64(H.seed)))
    data = np.empty((N, N, 2), dtype="<f8")
    data[..., 0] = H.entries.real
    data[..., 1] = H.entries.imag
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QBqd", N, _CONV_CODE[H.convention], seed, float(H.a)))
        fh.write(data.tobytes())


def read_matrix_binary(path) -> WignerMatrix:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError("not a matrix file")
        N, code, seed, a = struct.unpack("<QBqd", fh.read(struct.calcsize("<QBqd")))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(N, N, 2)
    seed = None if seed == -1 else int(np.uint64(np.int64(seed)))
    return WignerMatrix(data[..., 0] + 1j * data[..., 1], _CODE_CONV[code], seed, a)


def write_matrix_csv(path, H: WignerMatrix) -> None:
    N = H.N
    data = np.empty((N, 2 * N))
    data[:, 0::2] = H.entries.real
    data[:, 1::2] = H.entries.imag
    with open(path, "w") as fh:
        fh.write(f"# N={N}\n# convention={H.convention}\n# seed={H.seed}\n# a={H.a!r}\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_matrix_csv(path) -> WignerMatrix:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    H = data[:, 0::2] + 1j * data[:, 1::2]
    seed = None if meta.get("seed") in (None, "None") else int(meta["seed"])
    return WignerMatrix(H, meta.get("convention", "support2"), seed, float(meta.get("a", 0.0)))
