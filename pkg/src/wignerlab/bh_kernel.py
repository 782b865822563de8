"""Contour-integral correlation kernel for a Gaussian-deformed fixed spectrum.

Energies are in the ``support1`` convention.  With ``t = a^2`` and ``S = t/N``
the rescaled kernel ``(1/N rho) K(u, u + tau/(N rho))`` is a double contour
integral of ``h(w) g(z, w) exp(N (f(w) - f(z)))``, where ``f`` has a pair of
complex conjugate critical points ``q^+-``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from .errors import NumericalError, PoleError, SaddleError
from .fredholm import sine_kernel
from .statistics import SemicircleRef, semicircle_quantiles

POLE_TOL = 1e-13
EPS = np.finfo(float).eps


def deformed_density(u: float, t: float) -> float:
    """Semicircle density (support1 convention) after adding ``sqrt(t)`` times a GUE."""
    return float(SemicircleRef("support1", math.sqrt(t)).density(u))


@dataclass(frozen=True, eq=False)
class KernelConfig:
    u: float
    tau: float
    t: float
    y: np.ndarray
    r: float | None = None
    omega: float | None = None
    varrho: float | None = None
    truncation: float = 1e-16
    epsrel: float = 1e-10
    eta0: float = 0.1
    K: float = 10.0

    def __post_init__(self):
        y = np.sort(np.asarray(getattr(self.y, "eigenvalues", self.y), dtype=float))
        object.__setattr__(self, "y", y)
        if not self.t > 0:
            raise ValueError("t must be positive")
        if y.size == 0:
            raise ValueError("empty spectrum")
        if np.max(np.abs(y)) > self.K:
            raise ValueError("spectrum must lie inside [-K, K]")
        if abs(self.u) >= 1:
            raise ValueError("u must lie in the bulk (|u| < 1)")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")

    @classmethod
    def from_lambda(cls, y, lam: float, u: float = 0.0, tau: float = 1.0, **kw) -> "KernelConfig":
        """``t = N^{lambda - 1}``."""
        N = len(np.asarray(getattr(y, "eigenvalues", y)))
        return cls(u=u, tau=tau, t=float(N) ** (lam - 1.0), y=y, **kw)

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def S(self) -> float:
        return self.t / self.N

    @property
    def rho(self) -> float:
        return self.varrho if self.varrho is not None else deformed_density(self.u, self.t)

    @property
    def eta(self) -> float:
        return self.eta0 * self.t * math.sqrt(1.0 - self.u**2)

    def replace(self, **kw) -> "KernelConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return KernelConfig(**d)


# --------------------------------------------------------------------------
# f_N, g_N, h_N


def _check_poles(z, y):
    z = np.asarray(z, dtype=complex)
    d = np.min(np.abs(z.reshape(-1, 1) - y[None, :]), axis=1)
    if np.any(d < POLE_TOL):
        raise PoleError("evaluation point collides with a spectral point")
    return z


def f_N(z, cfg: KernelConfig, order: int = 0):
    """``f_N`` (order 0) or its first or second derivative."""
    z = _check_poles(z, cfg.y)
    diff = z[..., None] - cfg.y
    if order == 0:
        return (z * z - 2 * cfg.u * z) / (2 * cfg.t) + np.mean(np.log(diff), axis=-1)
    if order == 1:
        return (z - cfg.u) / cfg.t + np.mean(1.0 / diff, axis=-1)
    if order == 2:
        return 1.0 / cfg.t - np.mean(1.0 / diff**2, axis=-1)
    raise ValueError("order must be 0, 1 or 2")


def _r(cfg, r):
    if r is not None:
        return r
    if cfg.r is not None:
        return cfg.r
    return solve_saddle(cfg).q.real


def g_N_explicit(z, w, cfg: KernelConfig, r: float | None = None):
    r = _r(cfg, r)
    z = _check_poles(z, cfg.y)
    w = _check_poles(w, cfg.y)
    if np.any(w == r):
        return g_N_identity(z, w, cfg, r)
    s = np.mean((cfg.y - r) / ((w[..., None] - cfg.y) * (z[..., None] - cfg.y)), axis=-1)
    return (w - r + z - cfg.u) / (cfg.t * (w - r)) - s / (w - r)


def g_N_identity(z, w, cfg: KernelConfig, r: float | None = None):
    r = _r(cfg, r)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    fz, fw = f_N(z, cfg, 1), f_N(w, cfg, 1)
    same = np.abs(z - w) <= 1e-14 * np.maximum(1.0, np.abs(z))
    quot = np.where(same, f_N(z, cfg, 2), (fz - fw) / np.where(same, 1.0, z - w))
    return fz / (w - r) + quot


def g_N(z, w, cfg: KernelConfig, r: float | None = None):
    return g_N_explicit(z, w, cfg, r)


def _phi(x):
    """``expm1(x)/x`` for complex ``x``."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-5
    safe = np.where(small, 1.0, x)
    big = (np.exp(safe) - 1.0) / safe
    # exp(x) - 1 loses digits for moderate |x|; use 2 exp(x/2) sinh(x/2)
    big = np.where(np.abs(x) < 1.0, 2.0 * np.exp(safe / 2) * np.sinh(safe / 2) / safe, big)
    return np.where(small, 1.0 + x / 2 + x * x / 6, big)


def h_N(w, cfg: KernelConfig, r: float | None = None, tau: float | None = None, rho=None):
    r = _r(cfg, r)
    tau = cfg.tau if tau is None else tau
    rho = cfg.rho if rho is None else rho
    d = np.asarray(w, dtype=complex) - r
    return -d / (cfg.t * rho) * _phi(-tau * d / (cfg.t * rho))


def _h_over(w, r, tau, t, rho):
    d = w - r
    return -_phi(-tau * d / (t * rho)) / (t * rho)


# --------------------------------------------------------------------------
# saddle points


def continuum_saddle(u: float, t: float) -> complex:
    return ((2 * t + 1) * u + 2j * t * math.sqrt(1 + 4 * t - u * u)) / (1 + 4 * t)


@dataclass
class SaddleResult:
    q: complex
    f_second: complex
    residual: float
    closed_form_q: complex
    iterations: int
    method: str
    trace: list = field(default_factory=list)

    @property
    def q_minus(self) -> complex:
        return self.q.conjugate()


def solve_saddle(cfg: KernelConfig, tol: float = 1e-12, max_iter: int = 100) -> SaddleResult:
    """Upper critical point of ``f_N``: Newton from the continuum saddle, fixed point as fallback."""
    q0 = continuum_saddle(cfg.u, cfg.t)
    y, t, u = cfg.y, cfg.t, cfg.u
    trace = []

    def fp(z):
        return (z - u) / t + np.mean(1.0 / (z - y))

    def fpp(z):
        return 1.0 / t - np.mean(1.0 / (z - y) ** 2)

    z = q0
    for k in range(max_iter):
        res = abs(fp(z))
        trace.append(z)
        if res < tol * 1e-2:
            break
        step = fp(z) / fpp(z)
        z = z - step
        if not z.imag > 0 or not np.isfinite(z):
            break
        if abs(step) <= 4 * EPS * abs(z):
            trace.append(z)
            break
    if z.imag > 0 and np.isfinite(z) and abs(fp(z)) < tol:
        return SaddleResult(complex(z), complex(fpp(z)), float(abs(fp(z))), q0, k + 1, "newton", trace)

    z = q0
    for k in range(max_iter):
        z = u - t * np.mean(1.0 / (z - y))
        trace.append(z)
        if not z.imag > 0:
            raise SaddleError("fixed-point iteration left the upper half plane", trace)
        if abs(fp(z)) < tol:
            return SaddleResult(complex(z), complex(fpp(z)), float(abs(fp(z))), q0, k + 1,
                                "fixed-point", trace)
    raise SaddleError(f"no saddle within {max_iter} iterations", trace)


# --------------------------------------------------------------------------
# contour quadrature


@dataclass
class KernelValue:
    value: float
    imag: float
    error: float
    saddle: SaddleResult
    r: float
    omega: float
    valid: bool


def _extent(logmag, start, step, floor):
    """Distance from ``start`` beyond which ``logmag`` stays below ``floor``."""
    d = step
    while logmag(start + d) > floor:
        d *= 1.5
        if d > 1e3:
            raise NumericalError("integrand does not decay along the contour")
    return d


def eval_kernel(cfg: KernelConfig, r: float | None = None, saddle: SaddleResult | None = None) -> KernelValue:
    """Rescaled kernel ``(1/N rho) K(u, u + tau/(N rho))`` by contour quadrature.

    The double integral separates into products of one-dimensional contour
    integrals because ``g`` is a sum of products of functions of ``z`` and ``w``.
    """
    sd = saddle or solve_saddle(cfg)
    q = sd.q
    r = cfg.r if r is None and cfg.r is not None else (q.real if r is None else r)
    omega = cfg.omega or q.imag
    N, t, u, y, tau, rho = cfg.N, cfg.t, cfg.u, cfg.y, cfg.tau, cfg.rho
    c = float(np.real(f_N(q, cfg)))
    floor = math.log(cfg.truncation) - 4.0
    width = math.sqrt(t / N)

    def nf(z):
        return N * ((z * z - 2 * u * z) / (2 * t) - c) + np.sum(np.log(z - y))

    # horizontal lines through +-i omega
    def z_vec(x, sign):
        z = x + 1j * sign * omega
        E = np.exp(-nf(z))
        return np.concatenate(([E, (z - u) * E], E / (z - y)))

    xr = r
    dxl = _extent(lambda x: -np.real(nf(x + 1j * omega)), xr, width, floor)
    dxr = _extent(lambda x: -np.real(nf(x + 1j * omega)), xr, -width, floor)
    xa, xb = xr - dxr, xr + dxl
    xa, xb = min(xa, xr - dxl), max(xb, xr + dxr)
    kw = dict(epsabs=0.0, epsrel=cfg.epsrel, norm="max", limit=4000)
    plus, e1 = quad_vec(lambda x: z_vec(x, 1), xa, xb, points=[q.real], **kw)
    minus, e2 = quad_vec(lambda x: z_vec(x, -1), xa, xb, points=[q.real], **kw)
    Z = minus - plus  # upper line runs right to left

    # vertical line through r, with a small detour around a nearby y_j
    def w_vec(w):
        E = np.exp(nf(w))
        ho = _h_over(w, r, tau, t, rho)
        hE = (w - r) * ho * E
        return np.concatenate(([hE, ho * E], ho * E / (w - y)))

    scale = max(1.0, abs(r))
    rad = max(1e-2 / N**2, 10 * EPS * scale)
    near = np.abs(y - r) < rad
    smax = omega + _extent(lambda s: np.real(nf(r + 1j * s)), omega, width, floor)
    pts = [omega, -omega]
    if near.any():
        side = 1.0 if y[near][0] <= r else -1.0
        R = 2 * rad
        up, e3 = quad_vec(lambda s: 1j * w_vec(r + 1j * s), R, smax, points=[omega], **kw)
        lo, e4 = quad_vec(lambda s: 1j * w_vec(r + 1j * s), -smax, -R, points=[-omega], **kw)

        def arc(th):
            e = np.exp(1j * th)
            return 1j * R * e * w_vec(r + R * e)

        a0, a1 = (-math.pi / 2, math.pi / 2) if side > 0 else (-math.pi / 2, -3 * math.pi / 2)
        mid, e5 = quad_vec(arc, a0, a1, **kw)
        W = up + lo + mid
        werr = e3 + e4 + e5
    else:
        W, werr = quad_vec(lambda s: 1j * w_vec(r + 1j * s), -smax, smax, points=pts + [0.0], **kw)

    I0, I1, Jz = Z[0], Z[1], Z[2:]
    W0, W1, Ww = W[0], W[1], W[2:]
    total = (I0 * W0 + I1 * W1) / t - np.sum((y - r) * Jz * Ww) / N
    val = N * total / (2j * math.pi) ** 2
    scale_terms = N * (abs(I0 * W0) + abs(I1 * W1)) / t / (4 * math.pi**2)
    err = scale_terms * cfg.epsrel + N * (e1 + e2 + werr) * max(abs(I0), abs(W0)) / (4 * math.pi**2)
    valid = abs(val.imag) <= 1e-6 * max(1.0, abs(val.real))
    return KernelValue(float(val.real), float(val.imag), float(err), sd, r, omega, bool(valid))


def saddle_approx_kernel(cfg: KernelConfig, r: float | None = None, swap: bool = False) -> float:
    """Two-saddle value ``(i/2 pi) (h(q^+) - h(q^-))`` with ``r = Re q`` by default."""
    sd = solve_saddle(cfg)
    qp, qm = sd.q, sd.q.conjugate()
    if swap:
        qp, qm = qm, qp
    r = cfg.r if r is None and cfg.r is not None else (sd.q.real if r is None else r)
    hp = complex(h_N(qp, cfg, r))
    hm = complex(h_N(qm, cfg, r))
    return float((1j / (2 * math.pi) * (hp - hm)).real)


def correlation_determinant(alphas, cfg: KernelConfig) -> float:
    """``det`` of rescaled kernel values at ``u + alpha_i/(N rho)``, with ``r`` and ``rho`` fixed at ``cfg.u``."""
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    if not 1 <= a.size <= 4:
        raise ValueError("between 1 and 4 points supported")
    rho = cfg.rho
    r = cfg.r if cfg.r is not None else solve_saddle(cfg).q.real
    M = np.empty((a.size, a.size))
    for i in range(a.size):
        row = cfg.replace(u=cfg.u + a[i] / (cfg.N * rho), varrho=rho, r=r)
        sd = solve_saddle(row)
        for j in range(a.size):
            M[i, j] = eval_kernel(row.replace(tau=a[j] - a[i]), saddle=sd).value
    return float(np.linalg.det(M))


def qS_density_smallN(x, y, S: float) -> float:
    """Eigenvalue density of ``diag(y) + sqrt(N S) V`` (``V`` a support2 GUE) at ``x``.

    Integrates to ``N!`` over all of ``R^N`` and to 1 over ordered ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    N = y.size
    if x.size != N:
        raise ValueError("x and y must have equal length")
    if not 1 <= N <= 4:
        raise ValueError("N must lie in [1, 4]")
    if not S > 0:
        raise ValueError("S must be positive")
    if N > 1 and np.min(np.abs(np.subtract.outer(y, y))[np.triu_indices(N, 1)]) == 0:
        raise ValueError("y must be distinct")

    def vdm(v):
        i, j = np.triu_indices(N, 1)
        return float(np.prod(v[j] - v[i]))

    G = np.exp(-np.subtract.outer(x, y) ** 2 / (2 * S))
    return (2 * math.pi * S) ** (-N / 2) * vdm(x) / vdm(y) * float(np.linalg.det(G))


def kernel_sweep(cfg: KernelConfig, taus):
    """Rows ``(tau, eval_kernel, saddle approximation, sinc, |eval - sinc|)``."""
    sd = solve_saddle(cfg)
    rows = []
    for tau in taus:
        c = cfg.replace(tau=float(tau))
        kv = eval_kernel(c, saddle=sd)
        s = float(sine_kernel(tau))
        rows.append((float(tau), kv.value, saddle_approx_kernel(c), s, abs(kv.value - s)))
    return rows


def quantile_config(N: int, lam: float = 0.5, u: float = 0.0, tau: float = 1.0, **kw) -> KernelConfig:
    return KernelConfig.from_lambda(semicircle_quantiles(N), lam, u, tau, **kw)


def write_sweep_csv(path, rows, meta: dict | None = None):
    with open(path, "w", newline="") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["tau", "kernel", "saddle_approx", "sinc", "abs_error"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
