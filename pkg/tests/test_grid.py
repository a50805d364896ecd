import numpy as np
import pytest

from gsmrestore.grid import (
    diffusion_diagonal,
    divergence,
    edge_statistic,
    gradient,
    gradient_variance,
    indicator_gradient_sq,
)


class TestGradient:
    def test_constant_image_has_zero_gradient(self):
        assert not gradient(np.full((5, 7), 3.25)).any()

    def test_single_pixel_image(self):
        assert not gradient(np.array([[2.0]])).any()

    def test_two_by_two_forward_differences(self):
        # values 0 1 / 2 3: column difference 1, row difference 2 at the origin
        u = np.array([[0.0, 1.0], [2.0, 3.0]])
        g = gradient(u)
        assert g[0, 0, 0] == 1.0
        assert g[1, 0, 0] == 2.0

    def test_zero_on_last_column_and_row(self):
        u = np.random.default_rng(0).normal(size=(6, 4))
        g = gradient(u)
        assert not g[0, :, -1].any()
        assert not g[1, -1, :].any()

    def test_linearity_exact_on_integers(self):
        rng = np.random.default_rng(1)
        u = rng.integers(-50, 50, size=(5, 6)).astype(float)
        w = rng.integers(-50, 50, size=(5, 6)).astype(float)
        assert np.array_equal(gradient(4.0 * u + 0.25 * w), 4.0 * gradient(u) + 0.25 * gradient(w))

    def test_multichannel_shape(self):
        u = np.zeros((3, 4, 5))
        assert gradient(u).shape == (3, 2, 4, 5)


class TestDivergenceAdjointness:
    def test_zero_field(self):
        assert not divergence(np.zeros((2, 3, 3))).any()

    def test_adjoint_identity_random(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            h, w = rng.integers(1, 10, size=2)
            u = rng.normal(size=(h, w))
            p = rng.normal(size=(2, h, w))
            mismatch = np.vdot(gradient(u), p) + np.vdot(u, divergence(p))
            assert abs(mismatch) <= 1e-12 * (1.0 + np.linalg.norm(u) * np.linalg.norm(p))

    def test_constant_field_telescopes_to_boundary(self):
        # backward differences cancel in the interior; residue sits on the rim
        p = np.ones((2, 3, 3))
        d = divergence(p)
        assert d[1, 1] == 0.0
        assert np.any(d != 0.0)
        nonzero_rows, nonzero_cols = np.nonzero(d)
        on_rim = (nonzero_rows % 2 == 0) | (nonzero_cols % 2 == 0)
        assert on_rim.all()


class TestEdgeStatistic:
    def test_constant_image(self):
        assert not edge_statistic(np.full((4, 4), 0.7)).any()

    def test_single_channel_value(self):
        # gradient (1, 2) at the origin of the 2x2 ramp
        u = np.array([[0.0, 1.0], [2.0, 3.0]])
        assert edge_statistic(u)[0, 0] == pytest.approx(2.5)

    def test_channel_average(self):
        # |grad|^2 of 2 in channel 0 and 4 in channel 1 -> mean of 1 and 2
        u = np.zeros((2, 1, 2))
        u[0, 0, 1] = np.sqrt(2.0)
        u[1, 0, 1] = 2.0
        assert edge_statistic(u)[0, 0] == pytest.approx(1.5)


class TestIndicatorStencils:
    def test_interior_pixel(self):
        m = indicator_gradient_sq((2, 2), (5, 5))
        assert m[2, 2] == 2.0
        assert m[2, 1] == 1.0
        assert m[1, 2] == 1.0
        assert m.sum() == 4.0

    def test_corner_pixel(self):
        m = indicator_gradient_sq((0, 0), (3, 4))
        assert m[0, 0] == 2.0
        assert m.sum() == 2.0

    def test_degenerate_grid(self):
        assert not indicator_gradient_sq((0, 0), (1, 1)).any()

    def test_outside_grid_rejected(self):
        with pytest.raises(ValueError):
            indicator_gradient_sq((3, 0), (3, 3))

    def test_matches_explicit_gradient_of_indicator(self):
        h, w = 4, 5
        for row in range(h):
            for col in range(w):
                e = np.zeros((h, w))
                e[row, col] = 1.0
                explicit = np.sum(gradient(e) ** 2, axis=0)
                assert np.array_equal(indicator_gradient_sq((row, col), (h, w)), explicit)

    def test_sums_are_2_3_or_4(self):
        sums = diffusion_diagonal(np.ones((4, 6)))
        assert set(np.unique(sums)) == {2.0, 3.0, 4.0}
        assert sums[1, 1] == 4.0
        assert sums[0, 0] == 2.0


class TestWeightedStencils:
    def test_diffusion_diagonal_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for shape in [(1, 1), (1, 5), (4, 4), (3, 6)]:
            weights = rng.uniform(0.0, 2.0, size=shape)
            brute = np.zeros(shape)
            for row in range(shape[0]):
                for col in range(shape[1]):
                    brute[row, col] = np.sum(
                        weights * indicator_gradient_sq((row, col), shape)
                    )
            assert np.allclose(diffusion_diagonal(weights), brute, rtol=1e-14, atol=0)

    def test_gradient_variance_matches_brute_force(self):
        rng = np.random.default_rng(4)
        shape = (5, 4)
        c = rng.uniform(0.0, 1.5, size=shape)
        brute = np.zeros(shape)
        for row in range(shape[0]):
            for col in range(shape[1]):
                brute += c[row, col] * indicator_gradient_sq((row, col), shape)
        assert np.allclose(gradient_variance(c), brute, rtol=1e-14, atol=0)

    def test_gradient_variance_constant_interior(self):
        # constant per-pixel variance c0 spreads to 4*c0 away from the boundary
        c = np.full((5, 5), 0.3)
        assert gradient_variance(c)[2, 2] == pytest.approx(1.2)

    def test_gradient_variance_is_a_variance(self):
        # Monte-Carlo check: independent pixels with variances c
        rng = np.random.default_rng(5)
        shape = (3, 3)
        c = rng.uniform(0.2, 1.0, size=shape)
        draws = rng.normal(size=(40000,) + shape) * np.sqrt(c)
        grads = np.stack([np.sum(gradient(d) ** 2, axis=0) for d in draws])
        assert np.allclose(grads.mean(axis=0), gradient_variance(c), rtol=0.05, atol=0.01)
