import math

import numpy as np
import pytest
from scipy import integrate

from wignerlab.ensemble import gue
from wignerlab.spectra import SpectralSample, hermitian_eigenvalues
from wignerlab.statistics import (Accumulator, SemicircleRef, gap_statistic, in_good_set,
                                  merge_gap_estimates, pair_correlation_estimate, poisson_sample,
                                  semicircle_density, semicircle_quantiles, stieltjes_empirical,
                                  stieltjes_semicircle)

S1 = SemicircleRef("support1")
# mpmath quadrature of int rho(r) dr / (z - r), support1, 20 digits
STIELTJES_ORACLE = {
    0.3 + 0.1j: 0.53747887190255229497 - 1.7193511641850684148j,
    -0.7 + 0.02j: -1.3608222486469576049 - 1.3893826977667182256j,
    1.5 + 0.5j: 0.63239545627569186887 - 0.26710349832363310902j,
}


def test_density_values():
    assert abs(semicircle_density(0.0) - 1 / math.pi) < 1e-15
    assert semicircle_density(2.0) == 0 and semicircle_density(3.0) == 0
    assert abs(semicircle_density(0.0, S1) - 2 / math.pi) < 1e-15


@pytest.mark.parametrize("conv", ["support1", "support2"])
@pytest.mark.parametrize("a", [0.0, 0.3, 1.0])
def test_density_integrates_to_one(conv, a):
    ref = SemicircleRef(conv, a)
    R = ref.radius
    val = integrate.quad(lambda x: ref.density(x), -R, R, epsabs=1e-13)[0]
    assert abs(val - 1) < 1e-10
    assert abs(ref.cdf(R) - 1) < 1e-15 and ref.cdf(-R) == 0


def test_empirical_stieltjes():
    assert stieltjes_empirical(np.array([0.0]), 1j) == -1j
    y = np.array([-1.3, -0.2, 0.2, 1.3])
    m = stieltjes_empirical(y, 0.7j)
    assert abs(m.real) < 1e-16 and m.imag < 0
    with pytest.raises(ValueError):
        stieltjes_empirical(y, 0.5)
    with pytest.raises(ValueError):
        stieltjes_empirical(y, 0.5 - 0.1j)


def test_semicircle_stieltjes_closed_form():
    assert abs(stieltjes_semicircle(2j, S1) - 2j * (2 - math.sqrt(5))) < 1e-14
    for z in (1e6j, 1e6 + 1e-3j, -1e6 + 1j, 7e5 + 7e5j):
        m = stieltjes_semicircle(z, S1)
        assert abs(m - 1 / z) < 1e-5 * abs(1 / z)
    for z, v in STIELTJES_ORACLE.items():
        assert abs(stieltjes_semicircle(z, S1) - v) < 1e-8
    with pytest.raises(ValueError):
        stieltjes_semicircle(0.3, S1)


def test_stieltjes_against_quadrature_grid():
    ref = SemicircleRef("support2", 0.5)
    R = ref.radius
    for z in (0.1 + 0.3j, -2.0 + 0.05j, 2.5 + 1j, 0.0 + 4j):
        re = integrate.quad(lambda r: (ref.density(r) / (z - r)).real, -R, R, limit=400)[0]
        im = integrate.quad(lambda r: (ref.density(r) / (z - r)).imag, -R, R, limit=400)[0]
        assert abs(stieltjes_semicircle(z, ref) - (re + 1j * im)) < 1e-8


def test_gue_stieltjes_close():
    s = hermitian_eigenvalues(gue(2000, "support1", seed=7))
    z = 0.1 + 0.05j
    assert abs(stieltjes_empirical(s, z) - stieltjes_semicircle(z, S1)) < 0.05


def test_quantiles():
    y = semicircle_quantiles(2).eigenvalues
    assert y[0] == -y[1]
    assert abs(S1.cdf(y[1]) - 0.75) < 1e-12
    assert semicircle_quantiles(101).eigenvalues[50] == 0.0
    q = semicircle_quantiles(500, SemicircleRef("support2"))
    assert np.all(np.diff(q.eigenvalues) > 0)
    with pytest.raises(ValueError):
        semicircle_quantiles(1)


def test_quantiles_in_good_set():
    rep = in_good_set(semicircle_quantiles(2000), eta=0.02, tol=0.02)
    assert rep.passed and rep.bounded
    assert in_good_set(semicircle_quantiles(2000), eta=0.05, tol=0.05).passed


def test_good_set_bound_clause():
    y = semicircle_quantiles(2000).eigenvalues.copy()
    y[-1] = 20.0
    rep = in_good_set(SpectralSample(y, convention="support1"), eta=0.05, tol=1.0, K=10)
    assert not rep.bounded and not rep.passed and rep.max_abs_eigenvalue == 20.0
    with pytest.raises(ValueError):
        in_good_set(SpectralSample(np.array([]), convention="support1"), 0.05, 0.05)


def test_stieltjes_deviation_decays():
    z = np.linspace(-1.2, 1.2, 481) + 0.05j
    devs = [np.max(np.abs(stieltjes_empirical(semicircle_quantiles(N), z)
                          - stieltjes_semicircle(z, S1))) for N in (250, 500, 1000, 2000)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_gap_trivial_and_hand_built():
    pts = SpectralSample(np.array([-0.002, -0.0005, 0.0005, 0.003]))
    assert gap_statistic(pts, 0.0, 0.0, delta=0.5).value == 0
    # threshold s/(N rho(0)) = 0.002 with rho(0) = 1/pi; gaps 0.0015, 0.001 qualify, 0.0025 not
    est = gap_statistic(pts, 0.0, 0.008 / math.pi, delta=0.5)
    assert est.count == 2
    assert abs(est.value - 2 / (2 * 4 * 0.5 / math.pi)) < 1e-14


def test_gap_empty_window_and_errors():
    far = SpectralSample(np.array([-1.9, -1.5, 1.5, 1.9]))
    est = gap_statistic(far, 0.0, 1.0, delta=0.1)
    assert est.value == 0 and est.low_count
    with pytest.raises(ValueError):
        gap_statistic(far, 2.5, 1.0)
    with pytest.raises(ValueError):
        gap_statistic(far, 0.0, 1.0, delta=1.0)


def test_gap_merge():
    ests = [gap_statistic(hermitian_eigenvalues(gue(100, seed=s)), 0.0, 1.0) for s in range(6)]
    m = merge_gap_estimates(ests)
    assert m.M == 6
    assert abs(m.value - np.mean([e.value for e in ests])) < 1e-14
    assert abs(m.stderr - np.std([e.value for e in ests], ddof=1) / math.sqrt(6)) < 1e-12


def test_pair_correlation_two_points():
    rho = 1 / math.pi
    pts = SpectralSample(np.array([0.0, 1 / (2 * rho)]))
    est = pair_correlation_estimate([pts], tau_max=2.4, bins=8)
    assert est.counts.sum() == 1 and est.total_pairs == 1
    k = int(np.argmax(est.counts))
    assert est.edges[k] <= 1.0 < est.edges[k + 1]


def test_pair_correlation_empty_and_errors():
    far = SpectralSample(np.linspace(1.0, 1.9, 200))
    est = pair_correlation_estimate([far])
    assert est.empty and np.all(np.isnan(est.density))
    with pytest.raises(ValueError):
        pair_correlation_estimate([])
    with pytest.raises(ValueError):
        pair_correlation_estimate([SpectralSample(np.array([0.0, 0.1]))], tau_max=100.0)


def test_pair_correlation_poisson_flat():
    ref = SemicircleRef()
    est = pair_correlation_estimate([poisson_sample(1024, ref, s) for s in range(200)], ref=ref,
                                    N=1024)
    assert np.all(np.abs(est.density - 1) <= 3 * est.stderr + 1e-12)


def test_pair_correlation_repulsion():
    samples = [hermitian_eigenvalues(gue(300, seed=s)) for s in range(20)]
    est = pair_correlation_estimate(samples, tau_max=3.0, bins=12)
    assert est.density[0] < 0.2


def test_accumulator():
    xs = [0.3, -1.2, 2.5, 0.0, 4.1]
    a = Accumulator()
    for x in xs:
        a = a.add(x)
    assert a.count == 5 and abs(a.mean - np.mean(xs)) < 1e-15
    assert abs(a.stderr - np.std(xs, ddof=1) / math.sqrt(5)) < 1e-14
    assert math.isnan(Accumulator().mean) and math.isnan(Accumulator(1, 1.0, 1.0).stderr)
