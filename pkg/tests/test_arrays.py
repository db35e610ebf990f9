import numpy as np
import pytest

from beamtrain import (
    AngleGrid,
    Awv,
    beam_coverage,
    beam_gain,
    coverage_factor_rho,
    default_grid,
    leaf_angles,
    random_awv,
    rotate,
    steering_vector,
    subarray_phase_objective,
)


def brute_force_gain(weights, omega):
    """Term-by-term evaluation of sum_k w_k exp(-j pi (k-1) omega)."""
    total = 0j
    for k, w in enumerate(weights):
        total += w * np.exp(-1j * np.pi * k * omega)
    return total


class TestSteeringVector:
    def test_single_element(self):
        w = steering_vector(1, 0.37)
        assert w.weights.shape == (1,)
        assert w.weights[0] == pytest.approx(1.0)

    def test_zero_angle_all_equal(self):
        w = steering_vector(4, 0.0)
        np.testing.assert_allclose(w.weights, 0.5 * np.ones(4), atol=1e-15)

    def test_periodic_in_angle(self):
        a = steering_vector(8, -0.3)
        b = steering_vector(8, -0.3 + 2.0)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)

    def test_unit_power_all_active(self):
        w = steering_vector(16, 0.123)
        assert w.active_count == 16
        assert np.sum(np.abs(w.weights) ** 2) == pytest.approx(1.0)

    def test_rejects_empty_array(self):
        with pytest.raises(ValueError):
            steering_vector(0, 0.1)


class TestAwv:
    def test_rejects_mixed_amplitudes(self):
        with pytest.raises(ValueError):
            Awv(np.array([0.5, 0.25, 0.0, 0.0]))

    def test_rejects_all_zero(self):
        with pytest.raises(ValueError):
            Awv(np.zeros(4, dtype=complex))

    def test_random_awv_is_member(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            w = random_awv(12, rng)
            amps = np.abs(w.weights[w.weights != 0])
            np.testing.assert_allclose(amps, w.nu, atol=1e-12)
            assert np.sum(np.abs(w.weights) ** 2) == pytest.approx(1.0)

    def test_weights_read_only(self):
        w = steering_vector(4, 0.2)
        with pytest.raises(ValueError):
            w.weights[0] = 0.0


class TestBeamGain:
    def test_matched_steering_gain(self):
        w = steering_vector(16, 0.25)
        assert beam_gain(w, 0.25) == pytest.approx(4.0, abs=1e-12)

    def test_half_beamwidth_gain(self):
        # At one half beam width off center the gain drops to the coverage
        # factor times the peak; for 4 elements that is 0.653 * 2.
        w = steering_vector(4, 0.1)
        for sign in (+1, -1):
            g = abs(beam_gain(w, 0.1 + sign * 0.25))
            assert g == pytest.approx(coverage_factor_rho(4) * 2.0, abs=1e-12)

    def test_matches_brute_force_sum(self):
        rng = np.random.default_rng(7)
        w = random_awv(8, rng)
        got = beam_gain(w, 0.1)
        want = brute_force_gain(w.weights, 0.1)
        assert got == pytest.approx(want, abs=1e-12)

    def test_vectorized_over_angles(self):
        rng = np.random.default_rng(8)
        w = random_awv(6, rng)
        omegas = rng.uniform(-1, 1, size=17)
        got = beam_gain(w, omegas)
        want = np.array([brute_force_gain(w.weights, om) for om in omegas])
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_matched_filter_bound(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            w = random_awv(16, rng)
            omegas = rng.uniform(-1, 1, size=50)
            assert np.all(
                np.abs(beam_gain(w, omegas)) <= np.sqrt(w.active_count) + 1e-9
            )


class TestCoverageFactor:
    def test_small_array_value(self):
        assert coverage_factor_rho(4) == pytest.approx(0.65, abs=0.005)

    def test_large_array_value(self):
        assert coverage_factor_rho(128) == pytest.approx(0.64, abs=0.01)

    def test_single_element(self):
        assert coverage_factor_rho(1) == pytest.approx(1.0)

    def test_converges_to_two_over_pi(self):
        for n in (8, 16, 64, 256, 1024):
            assert abs(coverage_factor_rho(n) - 2.0 / np.pi) < 0.01


class TestRotate:
    def test_zero_rotation_is_identity(self):
        rng = np.random.default_rng(3)
        w = random_awv(10, rng)
        np.testing.assert_array_equal(rotate(w, 0.0).weights, w.weights)

    def test_rotated_steering_is_steering(self):
        got = rotate(steering_vector(8, -0.25), 0.5)
        want = steering_vector(8, 0.25)
        np.testing.assert_allclose(got.weights, want.weights, atol=1e-14)

    def test_preserves_membership_and_pattern(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w = random_awv(9, rng)
            r = rotate(w, rng.uniform(-2, 2))
            np.testing.assert_array_equal(r.weights == 0, w.weights == 0)
            assert np.sum(np.abs(r.weights) ** 2) == pytest.approx(1.0)

    def test_coverage_shifts_with_rotation(self):
        # Grid-snapped rotations roll the coverage mask exactly.
        grid = default_grid()
        rng = np.random.default_rng(5)
        for _ in range(20):
            w = random_awv(16, rng)
            steps = int(rng.integers(grid.size))
            psi = steps * grid.resolution
            cov = beam_coverage(w, 0.5, grid)
            cov_rot = beam_coverage(rotate(w, psi), 0.5, grid)
            np.testing.assert_array_equal(cov_rot.mask, np.roll(cov.mask, steps))


class TestBeamCoverage:
    def test_steering_coverage_matches_beam_width(self):
        grid = default_grid()
        cov = beam_coverage(steering_vector(16, 0.0), coverage_factor_rho(16), grid)
        assert len(cov.intervals) == 1
        lo, hi = cov.intervals[0]
        assert lo == pytest.approx(-1.0 / 16.0, abs=2 * grid.resolution)
        assert hi == pytest.approx(1.0 / 16.0, abs=2 * grid.resolution)

    def test_high_threshold_collapses_to_peak(self):
        grid = default_grid()
        cov = beam_coverage(steering_vector(16, 0.0), 0.999, grid)
        pts = cov.covered_points()
        assert pts.size < 20
        assert np.all(np.abs(pts) < 0.01)

    def test_padded_steering_matches_brute_force(self):
        # 4-element steering vector padded to 64 antennas, evaluated with a
        # literal summation oracle: coverage is its 2/4-wide beam.
        grid = default_grid()
        w = Awv(np.concatenate([steering_vector(4, -0.75).weights, np.zeros(60)]))
        rho = coverage_factor_rho(4)
        gains = np.array([abs(brute_force_gain(w.weights, om)) for om in grid.points])
        want_mask = gains > rho * gains.max()
        cov = beam_coverage(w, rho, grid)
        np.testing.assert_array_equal(cov.mask, want_mask)
        lo, hi = cov.intervals[0]
        assert lo == pytest.approx(-1.0, abs=2 * grid.resolution)
        assert hi == pytest.approx(-0.5, abs=2 * grid.resolution)

    def test_rejects_coarse_grid(self):
        with pytest.raises(ValueError):
            beam_coverage(steering_vector(64, 0.0), 0.5, AngleGrid.uniform(64))

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            beam_coverage(steering_vector(4, 0.0), 1.0)


class TestSubarrayPhaseObjective:
    def test_two_element_value(self):
        # (1 + e^{-j pi/2}) + (1 + e^{j pi/2}) = 2
        assert subarray_phase_objective(2, 0.0) == pytest.approx(2.0 + 0.0j, abs=1e-12)

    def test_periodic(self):
        a = subarray_phase_objective(4, 0.7)
        b = subarray_phase_objective(4, 0.7 + 2 * np.pi)
        assert abs(a) == pytest.approx(abs(b), abs=1e-12)

    def test_rejects_odd_size(self):
        with pytest.raises(ValueError):
            subarray_phase_objective(3, 0.1)

    def test_stationary_phase_is_argmax(self):
        thetas = np.linspace(-np.pi, np.pi, 10_000)
        for n_sub in (2, 4, 8, 16):
            best = -np.pi * (n_sub - 1) / n_sub
            vals = np.abs([subarray_phase_objective(n_sub, t) for t in thetas])
            assert abs(subarray_phase_objective(n_sub, best)) >= vals.max()


class TestAngleGrid:
    def test_uniform_grid_shape(self):
        grid = AngleGrid.uniform(1024)
        assert grid.size == 1024
        assert grid.points[0] == -1.0
        assert grid.points[-1] < 1.0
        assert grid.is_uniform
        assert grid.resolution == pytest.approx(2.0 / 1024)

    def test_roll_steps(self):
        grid = AngleGrid.uniform(1000)
        assert grid.roll_steps(10 * grid.resolution) == 10
        assert grid.roll_steps(-0.5) == -250

    def test_rejects_descending_points(self):
        with pytest.raises(ValueError):
            AngleGrid(np.array([0.0, -0.5]))

    def test_rejects_out_of_domain(self):
        with pytest.raises(ValueError):
            AngleGrid(np.array([-1.5, 0.0]))

    def test_leaf_angles_tile_domain(self):
        angs = leaf_angles(8)
        assert angs[0] == pytest.approx(-1 + 1 / 8)
        assert angs[-1] == pytest.approx(1 - 1 / 8)
        np.testing.assert_allclose(np.diff(angs), 2 / 8)
