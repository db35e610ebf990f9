import numpy as np
import pytest

from beamtrain import (
    AngleGrid,
    Codebook,
    Codeword,
    export_codebook,
    generate_bmw_ss,
    generate_codebook,
    generate_deact,
    load_codebook,
    rotate,
    steering_vector,
    validate_criterion1,
    validate_criterion2,
)

GRID = AngleGrid.uniform(4096)


def hand_built_bmw_first(n, layer):
    """Independent evaluation of the first codeword of a sub-array layer."""
    depth = int(np.log2(n))
    ell = depth - layer
    m_sub = 2 ** ((ell + 1) // 2)
    n_sub = n // m_sub
    n_active = m_sub if ell % 2 == 0 else m_sub // 2
    w = np.zeros(n, dtype=complex)
    for m in range(1, n_active + 1):
        phase = np.exp(-1j * m * np.pi * (n_sub - 1) / n_sub)
        steer = np.exp(1j * np.pi * np.arange(n_sub) * (-1 + (2 * m - 1) / n_sub))
        w[(m - 1) * n_sub : m * n_sub] = phase * steer / np.sqrt(n_sub)
    return w / np.linalg.norm(w)


class TestDeact:
    def test_two_antenna_root(self):
        cb = generate_deact(2)
        np.testing.assert_allclose(cb.codeword(0, 1).awv.weights, [1.0, 0.0], atol=1e-15)

    def test_four_antenna_layer1(self):
        cb = generate_deact(4)
        want = np.array([1.0, -1.0j, 0.0, 0.0]) / np.sqrt(2.0)
        np.testing.assert_allclose(cb.codeword(1, 1).awv.weights, want, atol=1e-14)

    def test_last_layer_is_steering(self):
        cb = generate_deact(8)
        for i in range(1, 9):
            want = steering_vector(8, -1 + (2 * i - 1) / 8)
            np.testing.assert_allclose(
                cb.codeword(3, i).awv.weights, want.weights, atol=1e-14
            )

    def test_active_counts_double_per_layer(self):
        cb = generate_deact(64)
        for k, layer in enumerate(cb.layers):
            assert all(cw.active_count == 2**k for cw in layer)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            generate_deact(6)

    def test_single_antenna_degenerate(self):
        cb = generate_deact(1)
        assert cb.depth == 0
        assert cb.codeword(0, 1).active_count == 1


class TestBmwSs:
    def test_four_antenna_layer1_structure(self):
        # One active sub-array of two antennas, scalar phase -pi/2.
        cb = generate_bmw_ss(4)
        want = np.exp(-1j * np.pi / 2) * np.array([1.0, -1.0j, 0, 0]) / np.sqrt(2)
        np.testing.assert_allclose(cb.codeword(1, 1).awv.weights, want, atol=1e-14)
        assert cb.codeword(1, 1).active_count == 2

    def test_four_antenna_root_all_active(self):
        cb = generate_bmw_ss(4)
        assert cb.codeword(0, 1).active_count == 4
        np.testing.assert_allclose(
            cb.codeword(0, 1).awv.weights, hand_built_bmw_first(4, 0), atol=1e-14
        )

    @pytest.mark.parametrize("n", [8, 32, 128])
    def test_first_codewords_match_hand_construction(self, n):
        cb = generate_bmw_ss(n)
        for k in range(cb.depth):
            np.testing.assert_allclose(
                cb.codeword(k, 1).awv.weights, hand_built_bmw_first(n, k), atol=1e-13
            )

    @pytest.mark.parametrize("n", [4, 16, 64])
    def test_active_counts_full_or_half(self, n):
        cb = generate_bmw_ss(n)
        for k in range(cb.depth):
            ell = cb.depth - k
            want = n if ell % 2 == 0 else n // 2
            # A single active antenna can occur only for the two-antenna array.
            want = max(want, 1)
            for cw in cb.layers[k]:
                assert cw.active_count == want

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            generate_bmw_ss(12)
        with pytest.raises(ValueError):
            generate_bmw_ss(1)

    def test_two_antenna_root_single_active(self):
        cb = generate_bmw_ss(2)
        np.testing.assert_allclose(
            np.abs(cb.codeword(0, 1).awv.weights), [1.0, 0.0], atol=1e-14
        )


class TestSharedStructure:
    @pytest.mark.parametrize("n", [8, 64])
    def test_methods_share_last_layer(self, n):
        cb_d, cb_b = generate_deact(n), generate_bmw_ss(n)
        for i in range(1, n + 1):
            np.testing.assert_allclose(
                cb_d.leaf(i).awv.weights, cb_b.leaf(i).awv.weights, atol=1e-12
            )

    @pytest.mark.parametrize("method", ["deact", "bmw-ss"])
    def test_layers_are_rotations_of_first(self, method):
        cb = generate_codebook(method, 32)
        for k, layer in enumerate(cb.layers):
            first = layer[0].awv
            for cw in layer:
                want = rotate(first, (2 * cw.index - 2) / 2**k)
                np.testing.assert_allclose(cw.awv.weights, want.weights, atol=1e-12)

    def test_layer_sizes(self):
        cb = generate_codebook("bmw-ss", 16)
        assert [len(layer) for layer in cb.layers] == [1, 2, 4, 8, 16]


class TestCriterionValidation:
    @pytest.mark.parametrize("n", [8, 32])
    def test_deact_passes_both_criteria(self, n):
        cb = generate_deact(n)
        assert validate_criterion1(cb, 0.5, GRID).passed
        assert validate_criterion2(cb, 0.5, GRID).passed

    def test_missing_leaf_fails_with_gap(self):
        cb = generate_deact(16)
        # Drop leaf 5; the layer union then misses roughly its 2/16-wide bin.
        broken_layers = cb.layers[:-1] + (cb.layers[-1][:4] + cb.layers[-1][5:],)
        broken = Codebook(n=16, method=cb.method, layers=broken_layers)
        report = validate_criterion1(broken, 0.5, GRID)
        assert not report.passed
        gap = report.layers[-1].uncovered
        assert gap.size > 0
        width = gap.max() - gap.min()
        assert width == pytest.approx(2 / 16, abs=0.05)

    def test_swapped_children_fail_containment(self):
        cb = generate_deact(16)
        layer1 = list(cb.layers[1])
        # Exchange the two children subtending different halves of the domain.
        layer1[0], layer1[1] = (
            Codeword(awv=layer1[1].awv, layer=1, index=1),
            Codeword(awv=layer1[0].awv, layer=1, index=2),
        )
        broken = Codebook(n=16, method=cb.method, layers=(cb.layers[0], tuple(layer1)) + cb.layers[2:])
        assert not validate_criterion2(broken, 0.5, GRID).passed

    @pytest.mark.parametrize("n", [8, 64])
    def test_bmw_ss_validates_at_native_threshold(self, n):
        # Sub-array beams cross over near 0.3-0.4 of their peak, below the
        # steering-beam coverage factor, so 0.25 is their working threshold.
        cb = generate_bmw_ss(n)
        report1 = validate_criterion1(cb, 0.25, GRID)
        for rep in report1.layers[1:]:
            assert rep.passed
        assert validate_criterion2(cb, 0.25, GRID).passed

    @pytest.mark.parametrize("n", [8, 64])
    def test_bmw_ss_root_null_at_domain_seam(self, n):
        # The inter-sub-array phase progression cannot close around the
        # period-2 circle, leaving an exact null at omega = +/-1; the root
        # layer therefore never covers the seam neighbourhood.
        cb = generate_bmw_ss(n)
        rep = validate_criterion1(cb, 0.25, GRID).layers[0]
        assert not rep.passed
        assert np.all(np.abs(rep.uncovered) > 0.9)


class TestExport:
    def test_round_trip_bit_identical(self, tmp_path):
        cb = generate_bmw_ss(16)
        path = tmp_path / "cb.txt"
        export_codebook(cb, path)
        loaded = load_codebook(path)
        assert loaded.n == cb.n and loaded.method == cb.method
        for k, layer in enumerate(cb.layers):
            for cw in layer:
                got = loaded.codeword(k, cw.index)
                np.testing.assert_array_equal(got.awv.weights, cw.awv.weights)

    def test_file_shape_small_codebook(self, tmp_path):
        path = tmp_path / "cb.txt"
        export_codebook(generate_deact(4), path)
        lines = path.read_text().splitlines()
        records = [ln for ln in lines if ln.startswith("codeword ")]
        assert len(records) == 7  # layers of 1 + 2 + 4
        assert "depth 2" in lines

    def test_active_counts_recorded(self, tmp_path):
        path = tmp_path / "cb.txt"
        export_codebook(generate_bmw_ss(64), path)
        counts = {
            int(ln.split()[3])
            for ln in path.read_text().splitlines()
            if ln.startswith("codeword ")
        }
        assert counts == {32, 64}

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not a codebook\n")
        with pytest.raises(ValueError):
            load_codebook(path)

    def test_rejects_truncated_file(self, tmp_path):
        cb = generate_deact(4)
        path = tmp_path / "cb.txt"
        export_codebook(cb, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ValueError):
            load_codebook(path)
