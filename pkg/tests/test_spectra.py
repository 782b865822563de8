import numpy as np
import pytest

from oracles import bisection_eigenvalues, random_hermitian
from wignerlab.ensemble import gue
from wignerlab.errors import ConvergenceError
from wignerlab.spectra import (SpectralSample, hermitian_eigenvalues, read_spectrum_csv,
                               tridiagonal_eigenvalues, write_spectrum_csv)


def test_zero_matrix():
    assert np.all(hermitian_eigenvalues(np.zeros((5, 5))).eigenvalues == 0)


def test_two_by_two_closed_form():
    ev = hermitian_eigenvalues(np.array([[1, 1j], [-1j, 1]])).eigenvalues
    np.testing.assert_allclose(ev, [0.0, 2.0], atol=1e-14)


def test_against_bisection_oracle():
    H = random_hermitian(50, np.random.default_rng(3))
    s = hermitian_eigenvalues(H)
    np.testing.assert_allclose(s.eigenvalues, bisection_eigenvalues(H), atol=1e-8)
    norm = np.linalg.norm(H)
    assert abs(s.eigenvalues.sum() - np.trace(H).real) < 1e-9 * 50 * norm
    assert abs((s.eigenvalues**2).sum() - norm**2) < 1e-9 * 50 * norm**2


def test_sorted_and_metadata():
    H = gue(64, "support1", seed=5)
    s = hermitian_eigenvalues(H)
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert s.convention == "support1" and s.seed == 5 and s.N == 64
    assert s.residual_bound > 0


def test_unitary_invariance():
    rng = np.random.default_rng(1)
    H = random_hermitian(120, rng)
    v = rng.normal(size=120) + 1j * rng.normal(size=120)
    v /= np.linalg.norm(v)
    Q = np.eye(120) - 2 * np.outer(v, v.conj())
    a = hermitian_eigenvalues(H).eigenvalues
    b = hermitian_eigenvalues(Q @ H @ Q.conj().T).eigenvalues
    assert np.max(np.abs(a - b)) < 1e-8


def test_shift():
    H = random_hermitian(40, np.random.default_rng(2))
    a = hermitian_eigenvalues(H).eigenvalues
    b = hermitian_eigenvalues(H + 2.5 * np.eye(40)).eigenvalues
    assert np.max(np.abs(b - a - 2.5)) < 1e-10


def test_matches_lapack_at_scale():
    H = gue(300, seed=11).entries
    np.testing.assert_allclose(hermitian_eigenvalues(H).eigenvalues, np.linalg.eigvalsh(H),
                               atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]], dtype=float))


def test_non_convergence_raises():
    with pytest.raises(ConvergenceError):
        tridiagonal_eigenvalues(np.array([0.0, np.nan, 1.0]), np.array([1.0, 1.0]))


def test_csv_round_trip(tmp_path):
    s = hermitian_eigenvalues(gue(10, seed=2))
    write_spectrum_csv(tmp_path / "s.csv", s)
    back = read_spectrum_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.eigenvalues, s.eigenvalues)
    assert back.seed == 2 and back.convention == "support2"


def test_sample_sorts_input():
    assert list(SpectralSample(np.array([3.0, -1.0, 2.0])).eigenvalues) == [-1.0, 2.0, 3.0]
