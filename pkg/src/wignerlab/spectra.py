"""Dense Hermitian eigenvalues: Householder tridiagonalization + implicit QL."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConvergenceError

MAX_SWEEPS = 30


@dataclass(frozen=True)
class SpectralSample:
    eigenvalues: np.ndarray
    convention: str = "support2"
    seed: int | None = None
    residual_bound: float = 0.0
    a: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be a 1-D vector")
        if np.any(np.diff(ev) < 0):
            ev = np.sort(ev)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def N(self) -> int:
        return self.eigenvalues.size

    def __len__(self):
        return self.eigenvalues.size


def householder_tridiagonal(H, block=32):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e)`` with ``d`` the diagonal and ``e`` the (nonnegative)
    sub-diagonal; the spectrum of the tridiagonal matrix equals that of ``H``.
    Reflectors are accumulated over panels of ``block`` columns so the
    trailing update is a rank-2k product.
    """
    A = np.array(H, dtype=complex, order="C", copy=True)
    n = A.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    k = 0
    while k < n - 2:
        nb = min(block, n - 2 - k)
        m = n - k
        V = np.zeros((m, nb), dtype=complex)
        W = np.zeros((m, nb), dtype=complex)
        for j in range(nb):
            i = k + j
            col = A[i:, i].copy()
            if j:
                col -= V[j:, :j] @ W[j, :j].conj() + W[j:, :j] @ V[j, :j].conj()
            d[i] = col[0].real
            x = col[1:]
            xnorm = np.linalg.norm(x)
            if xnorm == 0.0:
                continue
            x0 = x[0]
            phase = x0 / abs(x0) if x0 != 0 else 1.0
            alpha = -phase * xnorm
            v = x
            v[0] -= alpha
            tau = 2.0 / np.vdot(v, v).real
            e[i] = xnorm
            Bv = A[i + 1:, i + 1:] @ v
            if j:
                Vj = V[j + 1:, :j]
                Wj = W[j + 1:, :j]
                Bv -= Vj @ (Wj.conj().T @ v) + Wj @ (Vj.conj().T @ v)
            p = tau * Bv
            w = p - (0.5 * tau * np.vdot(v, p)) * v
            V[j + 1:, j] = v
            W[j + 1:, j] = w
        s = k + nb
        Vt = V[nb:]
        Wt = W[nb:]
        A[s:, s:] -= Vt @ Wt.conj().T + Wt @ Vt.conj().T
        k = s
    if n >= 2:
        d[n - 2] = A[n - 2, n - 2].real
        e[n - 2] = abs(A[n - 1, n - 2])
    if n >= 1:
        d[n - 1] = A[n - 1, n - 1].real
    return d, e


@njit(cache=True)
def _tql(d, e_in, max_sweeps):
    n = d.size
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = e_in[i]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 1e-300 or abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return -1 - l
            it += 1
            # Wilkinson-type shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def tridiagonal_eigenvalues(d, e):
    d = np.array(d, dtype=float, copy=True)
    e = np.asarray(e, dtype=float)
    if d.size == 0:
        return d
    status = _tql(d, e, MAX_SWEEPS)
    if status != 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {-status - 1} "
            f"within {MAX_SWEEPS} sweeps"
        )
    return np.sort(d, kind="stable")


def _as_array(H):
    return getattr(H, "entries", H)


def hermitian_eigenvalues(H, tol=1e-12) -> SpectralSample:
    """All eigenvalues of a Hermitian matrix (or ``WignerMatrix``), sorted.

    ``residual_bound`` is the usual backward-stability estimate
    ``c * n * eps * ||H||_F`` for Householder + QL.
    """
    A = np.asarray(_as_array(H))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    if np.abs(A - A.conj().T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    n = A.shape[0]
    d, e = householder_tridiagonal(A)
    ev = tridiagonal_eigenvalues(d, e)
    fro = np.linalg.norm(A)
    bound = 10.0 * max(n, 1) * np.finfo(float).eps * fro
    return SpectralSample(
        ev,
        convention=getattr(H, "convention", "support2"),
        seed=getattr(H, "seed", None),
        residual_bound=bound,
        a=getattr(H, "a", 0.0),
    )


def write_spectrum_csv(path, sample: SpectralSample, extra_meta=None):
    meta = {"N": sample.N, "convention": sample.convention,
            "seed": sample.seed, "a": sample.a, "residual_bound": sample.residual_bound}
    meta.update(extra_meta or {})
    with open(path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["eigenvalue"])
        for x in sample.eigenvalues:
            w.writerow([repr(float(x))])


def read_spectrum_csv(path) -> SpectralSample:
    meta = {}
    vals = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line.strip() and line.strip() != "eigenvalue":
                vals.append(float(line))
    seed = meta.get("seed")
    return SpectralSample(
        np.array(vals),
        convention=meta.get("convention", "support2"),
        seed=None if seed in (None, "None") else int(seed),
        residual_bound=float(meta.get("residual_bound", 0.0)),
        a=float(meta.get("a", 0.0)),
    )
