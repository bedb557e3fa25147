import itertools
import math

import numpy as np
import pytest

from juntalab import (
    DomainError,
    LengthMismatchError,
    as_bias_vector,
    assignments,
    chi,
    density,
    sample,
    sample_batch,
    sigma,
    sigma_vector,
)


class TestSigma:
    def test_values(self):
        assert sigma(0.0) == 1.0
        assert sigma(0.5) == pytest.approx(0.8660254037844386, abs=1e-15)
        assert sigma(-0.5) == sigma(0.5)

    def test_domain(self):
        for r in (-1.0, 1.0, 1.5, -2):
            with pytest.raises(DomainError):
                sigma(r)

    def test_vector_form(self):
        rv = np.array([0.0, 0.5, -0.9])
        sv = sigma_vector(rv)
        assert sv == pytest.approx([sigma(r) for r in rv], abs=1e-15)
        with pytest.raises(DomainError):
            sigma_vector(np.array([0.0, 1.0]))


class TestBiasVector:
    def test_scalar_broadcast(self):
        rv = as_bias_vector(0.3, 4)
        assert rv.shape == (4,)
        assert np.all(rv == 0.3)

    def test_sequence_passthrough(self):
        rv = as_bias_vector([0.1, -0.2], 2)
        assert rv.tolist() == [0.1, -0.2]

    def test_shape_checked(self):
        with pytest.raises(LengthMismatchError):
            as_bias_vector([0.1, 0.2], 3)

    def test_domain_checked(self):
        with pytest.raises(DomainError):
            as_bias_vector([0.1, 1.0], 2)


class TestDensity:
    def test_uniform(self):
        for n in (1, 3, 6):
            x = (1,) * n
            assert density(0.0, x) == pytest.approx(0.5**n, abs=1e-15)

    def test_biased_values(self):
        assert density(0.5, (1,)) == pytest.approx(0.75, abs=1e-15)
        assert density(0.5, (1, 1)) == pytest.approx(0.5625, abs=1e-15)
        assert density([0.5, -0.5], (1, 1)) == pytest.approx(0.75 * 0.25, abs=1e-15)

    def test_normalization_and_mean(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 5, 8):
            rv = rng.uniform(-0.9, 0.9, size=n)
            xs = assignments(n)
            masses = np.array([density(rv, x) for x in xs])
            assert masses.sum() == pytest.approx(1.0, abs=1e-12)
            for i in range(n):
                mean = float((masses * xs[:, i]).sum())
                assert mean == pytest.approx(rv[i], abs=1e-12)


class TestSampling:
    def test_deterministic(self):
        a = sample(0.3, np.random.default_rng(5), n=6)
        b = sample(0.3, np.random.default_rng(5), n=6)
        assert np.array_equal(a, b)

    def test_batch_shape_and_values(self):
        xs = sample_batch([0.2, -0.2, 0.0], np.random.default_rng(1), 100)
        assert xs.shape == (100, 3)
        assert set(np.unique(xs)) <= {-1, 1}

    def test_empirical_mean(self):
        rv = np.array([0.6, -0.4, 0.0, 0.25])
        xs = sample_batch(rv, np.random.default_rng(33), 200_000)
        err = np.abs(xs.mean(axis=0) - rv)
        assert np.all(err < 0.01)

    def test_extreme_bias(self):
        xs = sample_batch(0.999, np.random.default_rng(2), 1000, n=2)
        assert xs.mean() > 0.99


class TestChi:
    def test_empty_set(self):
        assert chi((), (1, -1), 0.0) == 1.0

    def test_single_coordinate(self):
        got = chi((0,), (1,), 0.5)
        assert got == pytest.approx(0.5773502691896258, abs=1e-15)

    def test_uniform_pair(self):
        assert chi((0, 1), (1, -1), 0.0) == pytest.approx(-1.0, abs=1e-15)

    def test_orthonormality(self):
        # sum_x density * chi_S * chi_T = [S == T], exactly the defining
        # property of the standardized characters
        rng = np.random.default_rng(11)
        for n in (2, 3, 4):
            rv = rng.uniform(-0.8, 0.8, size=n)
            xs = assignments(n)
            masses = np.array([density(rv, x) for x in xs])
            subsets = [
                tuple(S)
                for size in range(n + 1)
                for S in itertools.combinations(range(n), size)
            ]
            for S in subsets:
                for T in subsets:
                    val = math.fsum(
                        m * chi(S, x, rv) * chi(T, x, rv) for m, x in zip(masses, xs)
                    )
                    want = 1.0 if S == T else 0.0
                    assert val == pytest.approx(want, abs=1e-10)

    def test_character_mean_is_zero(self):
        rv = [0.3, -0.6, 0.1]
        xs = assignments(3)
        masses = np.array([density(rv, x) for x in xs])
        val = math.fsum(m * chi((0, 2), x, rv) for m, x in zip(masses, xs))
        assert val == pytest.approx(0.0, abs=1e-12)
