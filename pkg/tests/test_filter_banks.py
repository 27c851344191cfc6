import numpy as np
import pytest
from hypothesis import given, strategies as st

from scattering_energy import filter_banks as fb
from scattering_energy.spectral_core import ConfigurationError, DomainError, FrequencyGrid


@pytest.fixture(scope="module")
def meyer():
    return fb.build_meyer_wavelet_bank(FrequencyGrid(1, 1024, 32.0), 4)


@pytest.fixture(scope="module")
def wh():
    return fb.build_weyl_heisenberg_bank(FrequencyGrid(1, 1024, 8.0), 1.0, 6)


def test_meyer_transition_endpoints_and_symmetry():
    t = np.linspace(0, 1, 101)
    nu = fb.meyer_transition(t)
    assert nu[0] == 0 and nu[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(nu + nu[::-1], 1.0, atol=1e-12)
    assert np.all(np.diff(nu) >= 0)


@given(st.floats(0.5, 1.0))
def test_meyer_mother_partition(w):
    # adjacent dyadic copies square-sum to one across the overlap
    total = fb.meyer_mother_hat(np.array([w]))**2 + fb.meyer_mother_hat(np.array([2 * w]))**2
    assert total[0] == pytest.approx(1.0, abs=1e-12)


def test_meyer_bank_is_parseval(meyer):
    A, B = fb.frame_bounds(meyer)
    assert abs(A - 1) < 1e-12 and abs(B - 1) < 1e-12
    assert meyer.labels == [1, -1, 2, -2, 3, -3, 4, -4]


def test_meyer_mirror_symmetry(meyer):
    for j in range(1, 5):
        g = {f.index: f.spectral_samples for f in meyer.band_filters}
        np.testing.assert_array_equal(g[j][1:], g[-j][1:][::-1])


def test_meyer_precondition():
    with pytest.raises(ConfigurationError):
        fb.build_meyer_wavelet_bank(FrequencyGrid(1, 256, 16.0), 4)


def test_wh_bank(wh):
    A, B = fb.frame_bounds(wh)
    assert abs(A - 1) < 1e-12 and abs(B - 1) < 1e-12
    report = fb.check_admissibility(wh)
    assert report.passed
    assert abs(report.delta - 1.0) <= wh.grid.spacing
    with pytest.raises(ConfigurationError):
        fb.build_weyl_heisenberg_bank(FrequencyGrid(1, 256, 8.0), 1.0, 7)


def test_assumption_on_meyer(meyer):
    r = fb.check_admissibility(meyer)
    assert r.passed and r.gap_ok
    assert abs(r.delta - 1.0) <= meyer.grid.spacing
    assert all(v.verdict == "pass" for v in r.filters)


def test_counterexample_bank_fails_assumption():
    bank = fb.build_counterexample_bank(FrequencyGrid(1, 256, 8.0))
    r = fb.check_admissibility(bank)
    assert not r.passed and not r.gap_ok and r.delta == 0
    assert {v.verdict for v in r.filters} == {"fail"}
    assert fb.frame_bounds(bank) == (1.0, 1.0)


def test_two_d_bank():
    grid = FrequencyGrid(2, 64, 8.0)
    bank = fb.build_meyer_2d_bank(grid, 2, theta0=0.3)
    A, B = fb.frame_bounds(bank)
    assert abs(A - 1) < 1e-12 and abs(B - 1) < 1e-12
    r = fb.check_admissibility(bank)
    assert r.passed, r.summary()


def test_two_d_antipodal_support_fails():
    grid = FrequencyGrid(2, 32, 4.0)
    ring = ((grid.radius > 1) & (grid.radius < 2)).astype(float)
    bank = fb.bank_from_arrays(grid, np.sqrt(1 - ring), [ring])
    r = fb.check_admissibility(bank)
    assert r.filters[0].verdict == "fail"
    assert not r.passed


def test_two_d_undetermined_half_plane_wedge():
    grid = FrequencyGrid(2, 32, 4.0)
    wx, wy = grid.frequencies
    # an open 120-degree wedge: inside no axis-aligned quadrant, never antipodal
    ang = np.arctan2(wy, wx)
    wedge = ((np.abs(ang - np.pi / 2) < np.pi / 3) & (grid.radius > 1) & (grid.radius < 3)).astype(float)
    bank = fb.bank_from_arrays(grid, np.sqrt(1 - wedge), [wedge])
    assert fb.check_admissibility(bank).filters[0].verdict == "undetermined"


def test_normalize_to_parseval():
    grid = FrequencyGrid(1, 256, 16.0)
    bank = fb.build_meyer_wavelet_bank(grid, 3).scaled(1.7)
    assert fb.frame_bounds(bank)[0] == pytest.approx(1.7**2)
    norm = fb.normalize_to_parseval(bank)
    np.testing.assert_allclose(norm.lp_profile, 1.0, atol=1e-12)
    zero = fb.bank_from_arrays(grid, np.zeros(256), [np.ones(256) * (grid.radius > 1)])
    with pytest.raises(ConfigurationError):
        fb.normalize_to_parseval(zero)


def test_module_sequence_products():
    grid = FrequencyGrid(1, 256, 16.0)
    b1 = fb.build_meyer_wavelet_bank(grid, 3).scaled(2.0)
    b2 = fb.build_meyer_wavelet_bank(grid, 3).scaled(0.5)
    seq = fb.ModuleSequence([b1, b2], repeating=True)
    a, b = seq.products(3)
    np.testing.assert_allclose(a, [1, 1, 0.25, 0.0625])
    np.testing.assert_allclose(b, [1, 4, 4, 4])
    assert seq.bank(5) is b2
    with pytest.raises(IndexError):
        fb.ModuleSequence([b1]).bank(2)
    with pytest.raises(ConfigurationError):
        fb.ModuleSequence([b1, fb.build_meyer_wavelet_bank(FrequencyGrid(1, 512, 16.0), 3)])


def test_empty_bank_rejected():
    grid = FrequencyGrid(1, 16, 4.0)
    with pytest.raises(DomainError):
        fb.frame_bounds(fb.bank_from_arrays(grid, np.zeros(16), []))
