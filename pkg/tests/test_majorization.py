import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permhull import majorization


def prefix_sum_oracle(u, x):
    us = np.sort(np.asarray(u, dtype=float))[::-1]
    xs = np.sort(np.asarray(x, dtype=float))[::-1]
    tol = 1e-10 * max(1.0, np.abs(us).max(), np.abs(xs).max()) * len(us)
    partial = np.cumsum(us) - np.cumsum(xs)
    return bool(np.all(partial[:-1] >= -tol) and abs(partial[-1]) <= tol)


def random_doubly_stochastic(rng, n, terms=5):
    perms = [rng.permutation(n) for _ in range(terms)]
    w = rng.dirichlet(np.ones(terms))
    out = np.zeros((n, n))
    for wi, p in zip(w, perms):
        out[np.arange(n), p] += wi
    return out


class TestPredicates:
    def test_known_pairs(self):
        assert majorization.majorizes([2, 1, 0], [1, 1, 1])
        assert majorization.majorizes([1.5, 0.5], [1.5, 0.5])
        assert not majorization.majorizes([2, 2], [3, 1])

    def test_order_of_inputs_irrelevant_to_sorting(self):
        assert majorization.majorizes([0, 1, 2], [1, 1, 1])
        assert majorization.majorizes([1, 2, 0], [1, 1, 1])

    def test_total_sum_must_match(self):
        assert not majorization.majorizes([2, 1], [1, 1])

    def test_weak_pairs(self):
        assert majorization.weakly_majorizes([2, 1], [1, 1])
        assert not majorization.weakly_majorizes([1, 1], [2, 0])

    def test_majorization_implies_weak(self):
        rng = np.random.default_rng(20)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            u = rng.uniform(-1.0, 2.0, n)
            s = random_doubly_stochastic(rng, n)
            x = s @ u
            assert majorization.majorizes(u, x)
            assert majorization.weakly_majorizes(u, x)

    def test_in_permutahedron_mirrors_majorizes(self):
        assert majorization.in_permutahedron([1, 1, 1], [2, 1, 0])
        assert not majorization.in_permutahedron([3, 1], [2, 2])
        assert majorization.in_permutahedron([2, 2], [2, 2])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            majorization.majorizes([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            majorization.weakly_majorizes([1], [1, 2])

    def test_norm_monotonicity(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            u = rng.uniform(-2.0, 2.0, n)
            x = random_doubly_stochastic(rng, n) @ u
            for p in (1, 2, np.inf):
                assert (np.linalg.norm(u, p)
                        >= np.linalg.norm(x, p) - 1e-10)

    @settings(max_examples=120, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8),
           st.booleans())
    def test_agrees_with_prefix_sum_oracle(self, seed, n, related):
        rng = np.random.default_rng(seed)
        u = rng.uniform(-2.0, 2.0, n)
        if related:
            x = random_doubly_stochastic(rng, n) @ u
        else:
            x = rng.uniform(-2.0, 2.0, n)
            x += (u.sum() - x.sum()) / n
        assert majorization.majorizes(u, x) == prefix_sum_oracle(u, x)


class TestTransportMatrix:
    def test_forced_unique_case(self):
        s = majorization.transport_matrix([3.0, 1.0], [2.0, 2.0])
        assert np.allclose(s, [[0.5, 0.5], [0.5, 0.5]], atol=1e-9)

    def test_identity_input(self):
        x = np.array([2.0, 1.0, 0.5])
        s = majorization.transport_matrix(x, x)
        assert np.allclose(s @ x, x, atol=1e-9)
        assert np.allclose(s.sum(axis=0), 1.0, atol=1e-12)
        assert np.allclose(s.sum(axis=1), 1.0, atol=1e-12)

    def test_random_pairs(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            u = rng.uniform(-1.0, 3.0, 6)
            x = random_doubly_stochastic(rng, 6) @ u
            s = majorization.transport_matrix(u, x)
            assert np.all(s >= -1e-12)
            assert np.allclose(s.sum(axis=0), 1.0, atol=1e-12)
            assert np.allclose(s.sum(axis=1), 1.0, atol=1e-12)
            assert np.allclose(s @ u, x, atol=1e-9)

    def test_rejects_non_majorizing(self):
        with pytest.raises(ValueError):
            majorization.transport_matrix([2.0, 2.0], [3.0, 1.0])


class TestBirkhoff:
    def test_identity(self):
        dec = majorization.birkhoff(np.eye(3))
        assert len(dec) == 1
        assert dec.weights[0] == pytest.approx(1.0, abs=1e-12)
        assert list(dec.permutations[0]) == [0, 1, 2]

    def test_half_half(self):
        dec = majorization.birkhoff(np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert len(dec) == 2
        assert sorted(dec.weights) == pytest.approx([0.5, 0.5], abs=1e-12)
        perms = {tuple(p) for p in dec.permutations}
        assert perms == {(0, 1), (1, 0)}

    def test_reconstruction_known_combination(self):
        rng = np.random.default_rng(23)
        s = random_doubly_stochastic(rng, 7, terms=5)
        dec = majorization.birkhoff(s)
        assert len(dec) <= 49
        assert np.abs(dec.matrix() - s).max() <= 1e-12
        assert dec.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(dec.weights > 0)

    def test_extraction_bound(self):
        rng = np.random.default_rng(24)
        for n in (3, 5, 8):
            s = random_doubly_stochastic(rng, n, terms=n + 2)
            dec = majorization.birkhoff(s)
            assert len(dec) <= n * n - 2 * n + 2

    def test_apply_matches_matrix_action(self):
        rng = np.random.default_rng(25)
        s = random_doubly_stochastic(rng, 5)
        dec = majorization.birkhoff(s)
        v = rng.standard_normal(5)
        assert np.allclose(dec.apply(v), s @ v, atol=1e-12)

    def test_rejects_bad_matrices(self):
        with pytest.raises(ValueError):
            majorization.birkhoff(np.array([[0.5, 0.6], [0.5, 0.4]]))
        with pytest.raises(ValueError):
            majorization.birkhoff(np.array([[1.0, -0.1], [0.0, 1.1]]))
        with pytest.raises(ValueError):
            majorization.birkhoff(np.ones((2, 3)))

    def test_transport_birkhoff_round_trip(self):
        rng = np.random.default_rng(26)
        for _ in range(8):
            u = rng.uniform(0.0, 2.0, 6)
            x = random_doubly_stochastic(rng, 6) @ u
            s = majorization.transport_matrix(u, x)
            dec = majorization.birkhoff(s)
            assert np.allclose(dec.apply(u), x, atol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 7))
    def test_reconstruction_random(self, seed, n):
        rng = np.random.default_rng(seed)
        s = random_doubly_stochastic(rng, n, terms=int(rng.integers(1, 6)))
        dec = majorization.birkhoff(s)
        assert np.abs(dec.matrix() - s).max() <= 1e-12
        assert len(dec) <= n * n
