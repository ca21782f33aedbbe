import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from _helpers import random_descriptor, random_rotation
from screwseg import InvalidArgumentError, align, build_descriptors, shape_distance

L = 0.3
e_x = np.array([1.0, 0.0, 0.0])


def _brute_force_min(S1, S2, n=10_000, seed=0):
    Rs = Rotation.random(n, random_state=seed).as_matrix()
    diff = Rs @ S1 - S2
    return np.sqrt(np.einsum("nij,nij->n", diff, diff)).min()


class TestBuild:
    def test_constant_translation(self):
        nu = np.tile(e_x, (6, 1))
        S = build_descriptors(np.zeros((6, 3)), nu, L)
        assert S.shape == (4, 3, 6)
        expected = np.zeros((3, 6))
        expected[:, 3:] = e_x[:, None]
        np.testing.assert_array_equal(S, np.broadcast_to(expected, S.shape))

    def test_constant_rotation(self):
        w = np.tile(e_x / L, (5, 1))
        S = build_descriptors(w, np.zeros((5, 3)), L)
        expected = np.zeros((3, 6))
        expected[:, :3] = e_x[:, None]
        np.testing.assert_allclose(S, np.broadcast_to(expected, S.shape), atol=1e-15)

    def test_column_order(self):
        rng = np.random.default_rng(0)
        w, nu = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
        S = build_descriptors(w, nu, L)
        assert len(S) == 5
        i = 3
        np.testing.assert_array_equal(S[i - 1][:, 1], L * w[i])
        np.testing.assert_array_equal(S[i - 1][:, 0], L * w[i - 1])
        np.testing.assert_array_equal(S[i - 1][:, 5], nu[i + 1])

    def test_unit_speed_columns(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(9, 6))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        S = build_descriptors(a[:, :3] / L, a[:, 3:], L)
        norms = np.sum(S[:, :, :3] ** 2, axis=1) + np.sum(S[:, :, 3:] ** 2, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_needs_three_samples(self):
        with pytest.raises(InvalidArgumentError):
            build_descriptors(np.zeros((2, 3)), np.zeros((2, 3)), L)
        with pytest.raises(InvalidArgumentError):
            build_descriptors(np.zeros((4, 3)), np.zeros((5, 3)), L)


class TestAlign:
    def test_identical(self):
        S = random_descriptor(np.random.default_rng(2))
        np.testing.assert_allclose(align(S, S), np.eye(3), atol=1e-12)

    def test_recovers_rotation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            S = random_descriptor(rng)
            Q = random_rotation(rng)
            np.testing.assert_allclose(align(S, Q @ S), Q, atol=1e-9)

    def test_reflection_case_full_rank(self):
        rng = np.random.default_rng(4)
        S1 = random_descriptor(rng)
        S2 = np.diag([1.0, 1.0, -1.0]) @ S1 + 0.01 * rng.normal(size=(3, 6))
        # the unconstrained optimum is a reflection
        U, _, Vt = np.linalg.svd(S1 @ S2.T)
        assert np.linalg.det(Vt.T @ U.T) < 0
        R = align(S1, S2)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
        ours = np.linalg.norm(R @ S1 - S2)
        assert ours <= _brute_force_min(S1, S2) + 1e-12

    def test_reflection_case_planar(self):
        rng = np.random.default_rng(5)
        S1 = random_descriptor(rng)
        S1[2] = 0.0
        S2 = np.diag([1.0, -1.0, 1.0]) @ S1
        R = align(S1, S2)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
        # an in-plane mirror is a half-turn in 3D, so the distance vanishes
        assert np.linalg.norm(R @ S1 - S2) < 1e-9

    def test_broadcasts(self):
        rng = np.random.default_rng(6)
        A = rng.normal(size=(4, 3, 6))
        B = rng.normal(size=(4, 3, 6))
        R = align(A, B)
        for k in range(4):
            np.testing.assert_allclose(R[k], align(A[k], B[k]), atol=1e-12)

    def test_bad_shape(self):
        with pytest.raises(InvalidArgumentError):
            align(np.zeros((3, 5)), np.zeros((3, 5)))


class TestDistance:
    def test_identical_is_zero(self):
        S = random_descriptor(np.random.default_rng(7))
        assert shape_distance(S, S) < 1e-12

    def test_rotated_is_zero(self):
        rng = np.random.default_rng(8)
        S = random_descriptor(rng)
        assert shape_distance(S, random_rotation(rng) @ S) < 1e-9

    def test_translation_vs_rotation(self):
        trans = np.zeros((3, 6))
        trans[:, 3:] = e_x[:, None]
        rot = np.zeros((3, 6))
        rot[:, :3] = e_x[:, None]
        # every rotation leaves ||R a - b||^2 = 3 + 3 here
        assert shape_distance(trans, rot) == pytest.approx(np.sqrt(6.0), rel=1e-12)
        assert shape_distance(trans, rot) == pytest.approx(_brute_force_min(trans, rot, 2000), rel=1e-12)

    def test_not_below_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            S1, S2 = random_descriptor(rng), random_descriptor(rng)
            assert shape_distance(S1, S2) <= _brute_force_min(S1, S2, seed=int(rng.integers(1 << 30))) + 1e-12

    @given(st.integers(0, 100_000))
    def test_invariances(self, seed):
        rng = np.random.default_rng(seed)
        S1, S2 = random_descriptor(rng), random_descriptor(rng)
        Q = random_rotation(rng)
        d = shape_distance(S1, S2)
        assert d >= 0.0
        assert shape_distance(Q @ S1, S2) == pytest.approx(d, abs=1e-9)
        assert shape_distance(S1, Q @ S2) == pytest.approx(d, abs=1e-9)
        assert shape_distance(S2, S1) == pytest.approx(d, abs=1e-9)
        assert shape_distance(2 * S1, 2 * S2) == pytest.approx(2 * d, abs=1e-9)

    @given(st.integers(0, 100_000))
    def test_zero_only_for_rotated_copies(self, seed):
        rng = np.random.default_rng(seed)
        S1 = random_descriptor(rng)
        Q = random_rotation(rng)
        assert shape_distance(S1, Q @ S1) < 1e-9
        R = align(S1, Q @ S1)
        np.testing.assert_allclose(R @ S1, Q @ S1, atol=1e-9)
        # a perturbed copy that is not a rotation of S1 is strictly away
        S2 = Q @ S1 + 1e-3 * random_descriptor(rng)
        assert shape_distance(S1, S2) > 0.0
