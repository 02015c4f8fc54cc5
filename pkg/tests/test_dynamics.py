import math

import numpy as np
import pytest

from helpers import (fd_hessian_tensor, fd_jacobian, fd_mixed_derivative,
                     fd_parameter_velocity, random_interior_points)
from spacesplit import (InvalidStateError, Trajectory,
                        generate_trajectory, srb_histogram)
from spacesplit.dynamics import TWO_PI

PI = math.pi
S0 = np.zeros(4)


class TestApplyMap:
    def test_standard_map_branch0(self, baker):
        out = baker.apply_map(np.array([PI / 2, PI]), S0)
        np.testing.assert_allclose(out, [PI, PI / 2], rtol=0, atol=1e-15)

    def test_standard_map_branch1(self, baker):
        out = baker.apply_map(np.array([3 * PI / 2, 0.0]), S0)
        np.testing.assert_allclose(out, [PI, PI], rtol=0, atol=1e-15)

    def test_s1_perturbation(self, baker):
        out = baker.apply_map(np.array([PI / 2, PI]), np.array([0.2, 0, 0, 0]))
        np.testing.assert_allclose(out, [PI + 0.2, PI / 2], rtol=0, atol=1e-15)

    def test_output_in_domain(self, baker, rng):
        s = rng.uniform(-0.5, 0.5, 4)
        x = rng.uniform(0, TWO_PI, 2)
        for _ in range(200):
            x = baker.apply_map(x, s)
            assert 0.0 <= x[0] < TWO_PI and 0.0 <= x[1] < TWO_PI

    def test_invalid_state_rejected(self, baker):
        with pytest.raises(InvalidStateError):
            baker.apply_map(np.array([np.nan, 0.0]), S0)
        with pytest.raises(InvalidStateError):
            baker.apply_map(np.array([np.inf, 0.0]), S0)


class TestDerivatives:
    def test_jacobian_at_s0(self, baker, rng):
        for x in random_interior_points(rng, 5):
            np.testing.assert_allclose(baker.jacobian(x, S0),
                                       [[2, 0], [0, 0.5]], rtol=0, atol=1e-15)

    def test_jacobian_s1_example(self, baker):
        jac = baker.jacobian(np.array([PI / 2, PI]), np.array([0.2, 0, 0, 0]))
        np.testing.assert_allclose(jac, [[2, 0], [0, 0.5]], rtol=0, atol=1e-15)

    def test_determinant_one_at_s0(self, baker, rng):
        # Lebesgue measure is preserved exactly at s = 0
        for x in random_interior_points(rng, 20):
            assert np.linalg.det(baker.jacobian(x, S0)) == 1.0

    def test_second_derivative_zero_at_s0(self, baker, rng):
        u, v = rng.normal(size=2), rng.normal(size=2)
        d2 = baker.second_derivative(rng.uniform(0, TWO_PI, 2), S0, u, v)
        np.testing.assert_array_equal(d2, [0.0, 0.0])

    def test_second_derivative_example(self, baker):
        d2 = baker.second_derivative(np.array([PI / 2, PI]),
                                     np.array([0.2, 0, 0, 0]), [1, 0], [1, 0])
        np.testing.assert_allclose(d2, [-0.2, 0.0], rtol=0, atol=1e-15)

    def test_second_derivative_symmetry(self, baker, rng):
        s = rng.uniform(-0.4, 0.4, 4)
        for _ in range(20):
            x = rng.uniform(0, TWO_PI, 2)
            u, v = rng.normal(size=2), rng.normal(size=2)
            np.testing.assert_allclose(baker.second_derivative(x, s, u, v),
                                       baker.second_derivative(x, s, v, u),
                                       rtol=0, atol=1e-14)

    def test_second_derivative_bilinear(self, baker, rng):
        s = rng.uniform(-0.4, 0.4, 4)
        x = rng.uniform(0, TWO_PI, 2)
        u, v, w = (rng.normal(size=2) for _ in range(3))
        lhs = baker.second_derivative(x, s, 2.0 * u + w, v)
        rhs = 2.0 * baker.second_derivative(x, s, u, v) + baker.second_derivative(x, s, w, v)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-13)

    def test_parameter_velocity_examples(self, baker):
        np.testing.assert_allclose(
            baker.parameter_velocity(np.array([PI / 2, PI]), S0, 0), [1.0, 0.0],
            rtol=0, atol=1e-15)
        np.testing.assert_allclose(
            baker.parameter_velocity(np.array([PI / 2, PI / 4]), S0, 3), [0.0, 0.5],
            rtol=0, atol=1e-15)
        np.testing.assert_allclose(
            baker.parameter_velocity(np.array([0.0, 1.3]), S0, 2), [0.0, 0.0],
            rtol=0, atol=1e-15)

    def test_mixed_derivative_examples(self, baker):
        np.testing.assert_allclose(
            baker.mixed_derivative(np.array([PI / 2, PI]), S0, 0),
            [[math.cos(PI / 2), 0], [0, 0]], rtol=0, atol=1e-15)
        np.testing.assert_allclose(
            baker.mixed_derivative(np.array([1.0, PI / 4]), S0, 3),
            [[0, 0], [0, math.cos(PI / 2)]], rtol=0, atol=1e-15)

    def test_param_index_out_of_range(self, baker):
        x = np.array([1.0, 1.0])
        with pytest.raises(IndexError):
            baker.parameter_velocity(x, S0, 4)
        with pytest.raises(IndexError):
            baker.mixed_derivative(x, S0, 4)

    def test_all_derivatives_match_fd_at_random_pairs(self, baker, rng):
        # 100 random (x, s) pairs, central differences at step 1e-5
        for _ in range(100):
            x = random_interior_points(rng, 1)[0]
            s = rng.uniform(-0.3, 0.3, 4)
            np.testing.assert_allclose(baker.jacobian(x, s), fd_jacobian(baker, x, s),
                                       rtol=0, atol=1e-6)
            t_fd = fd_hessian_tensor(baker, x, s)
            u, v = rng.normal(size=2), rng.normal(size=2)
            np.testing.assert_allclose(baker.second_derivative(x, s, u, v),
                                       np.einsum("ijk,j,k->i", t_fd, u, v),
                                       rtol=0, atol=1e-5)
            for k in range(4):
                np.testing.assert_allclose(baker.parameter_velocity(x, s, k),
                                           fd_parameter_velocity(baker, x, s, k),
                                           rtol=0, atol=1e-5)
                np.testing.assert_allclose(baker.mixed_derivative(x, s, k),
                                           fd_mixed_derivative(baker, x, s, k),
                                           rtol=0, atol=1e-5)


class TestTrajectory:
    def test_single_point(self, baker):
        traj = generate_trajectory(baker, S0, seed=5, runup=0, length=1)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(5)))
        np.testing.assert_array_equal(traj.points[0], rng.uniform(0, TWO_PI, 2))
        assert traj.length == 1 and traj.runup == 0

    def test_recurrence_bitwise(self, baker):
        s = np.array([0.11, -0.05, 0.2, 0.08])
        traj = generate_trajectory(baker, s, seed=9, runup=50, length=500)
        for i in range(len(traj.points) - 1):
            np.testing.assert_array_equal(traj.points[i + 1],
                                          baker.apply_map(traj.points[i], s))

    def test_seed_reproducibility(self, baker):
        a = generate_trajectory(baker, S0, seed=42, runup=10, length=100)
        b = generate_trajectory(baker, S0, seed=42, runup=10, length=100)
        np.testing.assert_array_equal(a.points, b.points)
        c = generate_trajectory(baker, S0, seed=43, runup=10, length=100)
        assert not np.array_equal(a.points, c.points)

    def test_indexing(self, baker):
        traj = generate_trajectory(baker, S0, seed=1, runup=7, length=20)
        np.testing.assert_array_equal(traj.point(-7), traj.points[0])
        np.testing.assert_array_equal(traj.point(0), traj.points[7])
        assert traj.used.shape == (20, 2)

    def test_validation_errors(self, baker):
        with pytest.raises(ValueError):
            generate_trajectory(baker, S0, seed=1, runup=-1, length=5)
        with pytest.raises(ValueError):
            generate_trajectory(baker, S0, seed=1, runup=0, length=0)

    def test_ergodic_mean_at_s0(self, baker, cos4x2):
        # the invariant measure at s = 0 is Lebesgue, so <cos 4 x2> = 0
        from spacesplit import batch_means
        traj = generate_trajectory(baker, S0, seed=21, runup=1000, length=1_000_000)
        mean, se = batch_means(cos4x2.fn(traj.used))
        assert abs(mean) <= 3 * se

    def test_csv_export(self, baker, tmp_path):
        traj = generate_trajectory(baker, S0, seed=3, runup=2, length=4)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "n,x1,x2"
        assert len(lines) == 7
        assert lines[1].startswith("-2,")
        n, x1, x2 = lines[1].split(",")
        np.testing.assert_allclose([float(x1), float(x2)], traj.points[0])


class TestHistogram:
    def test_single_point_single_bin(self, baker):
        traj = generate_trajectory(baker, S0, seed=2, runup=0, length=1)
        hist = srb_histogram(traj, 4, 4)
        assert hist.sum() == 1.0
        assert (hist == 1.0).sum() == 1

    def test_normalization(self, baker):
        traj = generate_trajectory(baker, S0, seed=2, runup=100, length=50_000)
        hist = srb_histogram(traj, 50, 50)
        assert abs(hist.sum() - 1.0) <= 1e-12

    def test_uniform_at_s0(self, baker):
        n = 10_000_000
        traj = generate_trajectory(baker, S0, seed=11, runup=1000, length=n)
        hist = srb_histogram(traj, 50, 50)
        p = 1.0 / 2500.0
        bound = 5.0 * math.sqrt(p * (1 - p) / n)
        assert np.abs(hist - p).max() <= bound

    def test_nonuniform_at_s3(self, baker):
        # the perturbed invariant measure is singular: deviations from
        # uniformity blow far past the sampling noise seen at s = 0
        n = 2_000_000
        traj = generate_trajectory(baker, np.array([0, 0, 0.2, 0.0]),
                                   seed=11, runup=1000, length=n)
        hist = srb_histogram(traj, 50, 50)
        p = 1.0 / 2500.0
        sd = math.sqrt(p * (1 - p) / n)
        assert np.abs(hist - p).max() > 20.0 * sd

    def test_bad_bins(self, baker):
        traj = generate_trajectory(baker, S0, seed=2, runup=0, length=10)
        with pytest.raises(ValueError):
            srb_histogram(traj, 0, 5)

    def test_dimension_mismatch(self):
        traj = Trajectory(points=np.zeros((5, 3)), runup=0, length=5, seed=0)
        with pytest.raises(ValueError):
            srb_histogram(traj, 4, 4)
