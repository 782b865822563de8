"""Property-based checks of structural invariants."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wignerlab.bh_kernel import KernelConfig, g_N_explicit, g_N_identity, qS_density_smallN
from wignerlab.ensemble import (gaussian_law, gue, truncate_law, two_sided_exponential_law,
                                validate_law)
from wignerlab.fredholm import determinantal_correlation
from wignerlab.ou_flow import (GRID, HermiteDensity, apply_generator, hermite_functions,
                               reversal_approximant, semigroup)
from wignerlab.spectra import hermitian_eigenvalues
from wignerlab.statistics import (Accumulator, SemicircleRef, gap_statistic, semicircle_quantiles,
                                  stieltjes_empirical)

fast = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
finite = dict(allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2**32 - 1)


def chi2(f, g):
    return float(np.sum((f / g - 1) ** 2 * g))


@settings(max_examples=1000, deadline=None)
@given(arrays(float, (2, 4, 4), elements=st.floats(0.01, 1.0, **finite)))
def test_chi2_decreases_under_marginals(raw):
    f, g = raw[0] / raw[0].sum(), raw[1] / raw[1].sum()
    joint = chi2(f, g)
    for axis in (0, 1):
        assert chi2(f.sum(axis), g.sum(axis)) <= joint + 1e-12


@fast
@given(arrays(float, 9, elements=st.floats(-0.3, 0.3, **finite)),
       st.floats(0, 3), st.floats(0, 3))
def test_semigroup_law_and_mass(c, s, t):
    d = HermiteDensity(np.concatenate([[1.0], c]))
    two = semigroup(semigroup(d, s), t).coeffs
    np.testing.assert_allclose(two, semigroup(d, s + t).coeffs, rtol=1e-13, atol=1e-16)
    assert semigroup(d, t).coeffs[0] == 1.0
    if t > 0:
        assert reversal_approximant(d, t, 3).coeffs[0] == 1.0
    assert apply_generator(d).coeffs[0] == 0.0


@fast
@given(arrays(float, 5, elements=st.floats(-1, 1, **finite)), st.floats(0.0, 0.05),
       st.floats(0, 4))
def test_mehler_positivity(a, floor, t):
    # v = p^2 + floor is nonnegative everywhere and of degree 8, so K=8 is exact
    x, w = np.polynomial.hermite.hermgauss(20)
    H = hermite_functions(x, 8)
    v = (a @ H[:5]) ** 2 + floor
    d = HermiteDensity(H @ (w / math.sqrt(math.pi) * v), probability=True)
    assert np.min(semigroup(d, t)(GRID)) >= -1e-12 * max(1.0, d.coeffs[0])


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 40), seeds)
def test_sampling_hermitian_and_reproducible(N, seed):
    H = gue(N, seed=seed).entries
    assert np.array_equal(H, H.conj().T)
    assert np.array_equal(H, gue(N, seed=seed).entries)


@settings(max_examples=8, deadline=None)
@given(st.floats(2.0, 8.0))
def test_truncated_laws_validate(ell):
    for law in (gaussian_law(0.5), two_sided_exponential_law(2.0)):
        rep = validate_law(truncate_law(law, ell))
        assert rep.normalized and rep.mean_zero


@fast
@given(st.integers(2, 30), seeds, st.floats(-3, 3, **finite))
def test_shift_moves_spectrum(N, seed, c):
    H = gue(N, seed=seed).entries
    a = hermitian_eigenvalues(H).eigenvalues
    b = hermitian_eigenvalues(H + c * np.eye(N)).eigenvalues
    assert np.max(np.abs(b - a - c)) < 1e-10


@fast
@given(arrays(float, st.integers(1, 30), elements=st.floats(-3, 3, **finite)),
       st.floats(-4, 4), st.floats(0.01, 2))
def test_empirical_stieltjes_sign(y, x, eta):
    assert stieltjes_empirical(y, x + 1j * eta).imag < 0


@fast
@given(seeds, st.floats(0.1, 3.0))
def test_gap_statistic_shuffle_invariant(seed, s):
    x = hermitian_eigenvalues(gue(60, seed=seed % 1000)).eigenvalues
    shuffled = np.random.default_rng(seed).permutation(x)
    assert gap_statistic(x, 0.0, s, ref=SemicircleRef()) == \
        gap_statistic(shuffled, 0.0, s, ref=SemicircleRef())


@fast
@given(st.lists(st.floats(-100, 100, **finite), min_size=2, max_size=40), seeds)
def test_accumulator_merge_order(xs, seed):
    parts = [Accumulator().add(x) for x in xs]
    order = np.random.default_rng(seed).permutation(len(parts))
    fwd, perm = Accumulator(), Accumulator()
    for p in parts:
        fwd = fwd.merge(p)
    for i in order:
        perm = perm.merge(parts[i])
    assert fwd.count == perm.count
    scale = max(1.0, sum(abs(x) for x in xs))
    assert abs(fwd.mean - perm.mean) <= 1e-12 * scale
    assert abs(fwd.sumsq - perm.sumsq) <= 1e-12 * scale**2


@fast
@given(arrays(float, st.integers(1, 5), elements=st.floats(-3, 3, **finite)),
       st.floats(-50, 50, **finite), seeds)
def test_determinantal_translation_and_permutation(pts, shift, seed):
    base = determinantal_correlation(pts)
    perm = np.random.default_rng(seed).permutation(pts)
    assert abs(determinantal_correlation(perm) - base) < 1e-12
    assert abs(determinantal_correlation(pts + shift) - base) < 1e-11
    assert -1e-12 <= base <= 1 + 1e-12


@fast
@given(st.floats(-0.8, 0.8), st.floats(0.005, 0.5), st.integers(3, 80), st.floats(-0.9, 0.9),
       st.floats(-2, 2), st.floats(0.02, 2), st.floats(-2, 2), st.floats(0.02, 2),
       st.booleans(), st.booleans())
def test_kernel_identity(u, t, N, r, zr, zi, wr, wi, zs, ws):
    cfg = KernelConfig(u=u, tau=1.0, t=t, y=semicircle_quantiles(N))
    z = complex(zr, zi if zs else -zi)
    w = complex(wr, wi if ws else -wi)
    a, b = g_N_explicit(z, w, cfg, r), g_N_identity(z, w, cfg, r)
    assert abs(a - b) <= 1e-10 * max(abs(b), 1e-300) or abs(a - b) < 1e-12


@fast
@given(arrays(float, 3, elements=st.floats(-1, 1, **finite)), st.floats(0.01, 0.5), seeds)
def test_qS_permutation_symmetric(x, S, seed):
    y = np.array([-0.6, 0.1, 0.7])
    a = qS_density_smallN(x, y, S)
    b = qS_density_smallN(np.random.default_rng(seed).permutation(x), y, S)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)
    assert a >= 0
