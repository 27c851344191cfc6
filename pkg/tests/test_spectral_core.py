import numpy as np
import pytest
from hypothesis import given, strategies as st

from scattering_energy.spectral_core import (ConfigurationError, DimensionError, DomainError,
                                             FrequencyGrid, Signal, apply_transfer,
                                             band_energy_fraction, convolve, forward_transform,
                                             impulse, inverse_transform, l2_norm, modulus,
                                             sobolev_norm, top_octave_fraction)


def brute_circular(a, b):
    """O(n^2) circular convolution of two 1-D sample vectors in centered order."""
    n = a.size
    # centered order: sample k sits at offset k - n/2
    a0 = np.fft.ifftshift(a)
    b0 = np.fft.ifftshift(b)
    out = np.array([sum(a0[k] * b0[(m - k) % n] for k in range(n)) for m in range(n)])
    return np.fft.fftshift(out)


def random_signal(grid, seed):
    rng = np.random.default_rng(seed)
    return Signal.from_spatial(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


class TestGrid:
    def test_lattice_layout(self):
        g = FrequencyGrid(1, 16, 4.0)
        assert g.spacing == 0.5
        assert g.axis_frequencies[0] == -4.0
        assert g.axis_frequencies[8] == 0.0
        assert g.axis_frequencies[-1] == 4.0 - 0.5
        assert g.dx == pytest.approx(1 / 8)
        assert g.period == pytest.approx(16 * g.dx)

    @pytest.mark.parametrize("n", [0, 4, 12, 100])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ConfigurationError):
            FrequencyGrid(1, n, 1.0)

    def test_rejects_dimension_and_band(self):
        with pytest.raises(ConfigurationError):
            FrequencyGrid(3, 16, 1.0)
        with pytest.raises(ConfigurationError):
            FrequencyGrid(1, 16, 0.0)

    def test_refined_doubles_band_and_keeps_spacing(self):
        g = FrequencyGrid(2, 32, 4.0)
        r = g.refined()
        assert r.samples_per_axis == 64 and r.omega_max == 8.0
        assert r.spacing == g.spacing

    def test_radius_2d(self):
        g = FrequencyGrid(2, 8, 4.0)
        wx, wy = g.frequencies
        np.testing.assert_allclose(g.radius, np.hypot(wx, wy))


class TestTransform:
    @given(st.integers(0, 2**31), st.sampled_from([(1, 16), (1, 64), (2, 8), (2, 16)]))
    def test_parseval_and_roundtrip(self, seed, shape):
        grid = FrequencyGrid(shape[0], shape[1], 3.0)
        s = random_signal(grid, seed)
        f = forward_transform(s)
        assert np.isclose(l2_norm(f, "spatial"), l2_norm(f, "spectral"), rtol=1e-12)
        back = inverse_transform(Signal.from_spectral(grid, f.spectral))
        np.testing.assert_allclose(back.spatial, s.spatial, atol=1e-12)

    def test_domains_are_read_only(self):
        s = random_signal(FrequencyGrid(1, 16, 1.0), 0)
        assert s.valid_domains == {"spatial"}
        with pytest.raises(ValueError):
            s.spectral[0] = 1.0
        assert s.valid_domains == {"spatial", "spectral"}

    def test_transform_requires_domain(self):
        s = Signal.from_spectral(FrequencyGrid(1, 16, 1.0), np.ones(16))
        with pytest.raises(DomainError):
            forward_transform(s)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            Signal.from_spatial(FrequencyGrid(1, 16, 1.0), np.ones(8))


class TestConvolution:
    @pytest.mark.parametrize("n", [8, 32, 64])
    def test_matches_brute_force(self, n):
        grid = FrequencyGrid(1, n, 2.0)
        f, g = random_signal(grid, 1), random_signal(grid, 2)
        ref = brute_circular(f.spatial, g.spatial)
        assert np.max(np.abs(convolve(f, g).spatial - ref)) <= 1e-9

    def test_impulse_is_identity(self):
        grid = FrequencyGrid(2, 16, 2.0)
        f = random_signal(grid, 3)
        np.testing.assert_allclose(convolve(f, impulse(grid)).spatial, f.spatial, atol=1e-12)
        np.testing.assert_allclose(np.sqrt(grid.size) * impulse(grid).spectral, 1.0, atol=1e-12)

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            convolve(random_signal(FrequencyGrid(1, 16, 1.0), 0),
                     random_signal(FrequencyGrid(1, 16, 2.0), 0))

    def test_transfer_of_ones_is_identity(self):
        grid = FrequencyGrid(1, 32, 2.0)
        f = random_signal(grid, 4)
        np.testing.assert_allclose(apply_transfer(f, np.ones(32)).spatial, f.spatial, atol=1e-12)
        with pytest.raises(DimensionError):
            apply_transfer(f, np.ones(16))


class TestNorms:
    def test_modulus_preserves_energy(self):
        f = random_signal(FrequencyGrid(1, 64, 2.0), 5)
        assert np.isclose(modulus(f).energy(), f.energy(), rtol=1e-12)
        assert np.all(modulus(f).spatial.imag == 0)

    def test_sobolev_norm(self):
        grid = FrequencyGrid(1, 32, 4.0)
        f = random_signal(grid, 6)
        assert np.isclose(sobolev_norm(f, 0), l2_norm(f), rtol=1e-12)
        assert sobolev_norm(f, 1.5) > sobolev_norm(f, 0.5)
        with pytest.raises(DomainError):
            sobolev_norm(f, -1)

    def test_band_fractions(self):
        grid = FrequencyGrid(1, 32, 4.0)
        spec = np.zeros(32)
        spec[16 + 1] = 1.0  # w = 0.25
        spec[-1] = 1.0      # w = 3.75, top octave
        f = Signal.from_spectral(grid, spec)
        assert band_energy_fraction(f, 0, 1) == 0.5
        assert top_octave_fraction(f) == 0.5
        assert band_energy_fraction(Signal.zeros(grid)) == 0.0
