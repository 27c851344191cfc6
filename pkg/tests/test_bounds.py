import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from scattering_energy import bounds as bt
from scattering_energy.spectral_core import DomainError, FrequencyGrid, Signal


def test_layers_table_exact():
    table = bt.layers_table()
    for fam, expected in bt.TABLE_EXPECTED.items():
        assert tuple(table[fam]) == expected


@pytest.mark.parametrize("d", [1, 2, 3, 4, 7])
def test_alpha_against_mpmath(d):
    with mpmath.workdps(50):
        ref = mpmath.mpf(1) if d == 1 else mpmath.log(mpmath.sqrt(mpmath.mpf(d) / (d - mpmath.mpf(1) / 2)), 2)
    assert abs(bt.alpha_exponent(d) - float(ref)) <= 1e-12


@given(st.floats(1e-3, 5.0))
def test_gamma_against_mpmath(s):
    with mpmath.workdps(50):
        ref = min(mpmath.mpf(1), 2 * mpmath.mpf(s))
    assert abs(bt.sobolev_decay_exponent(s) - float(ref)) <= 1e-12


def test_r_hat():
    assert bt.r_hat_l(0.0, 2.0) == 1.0
    assert bt.r_hat_l(0.5, 2.0) == pytest.approx(0.25)
    assert bt.r_hat_l(1.5, 2.0) == 0.0
    with pytest.raises(DomainError):
        bt.r_hat_l(-1.0, 2.0)


def gaussian_signal(grid, width=1.5):
    return Signal.from_spectral(grid, np.exp(-grid.radius**2 / (2 * width**2)))


@pytest.mark.parametrize("family", [bt.WAVELET, bt.WEYL_HEISENBERG, bt.GENERAL])
@pytest.mark.parametrize("N", [1, 3, 5])
def test_bound_quadrature_converges(family, N):
    # coarse lattice sum vs a lattice of twice the resolution, both per unit energy
    # the bracket has a |w| kink at the origin, so lattice sums converge at second order
    coarse = FrequencyGrid(1, 2048, 16.0)
    fine = FrequencyGrid(1, 4096, 16.0)
    p = bt.BoundParams(family, 1, 1.0001, 1.0, 1.0, B_products=np.ones(N + 1))
    a = bt.bound(gaussian_signal(coarse), N, p) / gaussian_signal(coarse).energy()
    b = bt.bound(gaussian_signal(fine), N, p) / gaussian_signal(fine).energy()
    assert abs(a - b) <= 1e-4 * abs(b)
    # and against adaptive quadrature of the continuous integral
    def integrand(w):
        return math.exp(-w**2 / 1.5**2) * float(bt.bound_bracket(abs(w), N, p))
    edge = bt.bound_scale(N, p)
    num = integrate.quad(integrand, 0, edge, limit=200)[0] + integrate.quad(integrand, edge, 16)[0]
    den = integrate.quad(lambda w: math.exp(-w**2 / 1.5**2), 0, 16)[0]
    assert abs(b - num / den) <= 1e-4 * abs(num / den)


def test_bound_scales():
    p = bt.BoundParams(bt.GENERAL, d=2, l=2.0001, delta=0.5, B_products=np.ones(4))
    assert bt.bound_scale(3, p) == pytest.approx(3 ** bt.alpha_exponent(2) * 0.5)
    assert bt.bound_scale(3, bt.BoundParams(bt.WAVELET)) == pytest.approx((5 / 3) ** 2)
    assert bt.bound_scale(3, bt.BoundParams(bt.WEYL_HEISENBERG, R=2.0)) == pytest.approx(1.5**2 * 2)


def test_polynomial_bound_uses_frame_product():
    grid = FrequencyGrid(1, 128, 8.0)
    f = gaussian_signal(grid)
    p1 = bt.BoundParams(bt.GENERAL, B_products=np.array([1.0, 1.0, 1.0]))
    p2 = bt.BoundParams(bt.GENERAL, B_products=np.array([1.0, 2.0, 4.0]))
    assert bt.bound(f, 2, p2) == pytest.approx(4 * bt.bound(f, 2, p1))
    with pytest.raises(DomainError):
        bt.bound(f, 2, bt.BoundParams(bt.GENERAL))


def test_parameter_validation():
    with pytest.raises(DomainError):
        bt.BoundParams(bt.GENERAL, d=2, l=1.5)
    with pytest.raises(DomainError):
        bt.BoundParams(bt.WAVELET, d=2, l=2.5)
    with pytest.raises(DomainError):
        bt.BoundParams("nonsense")
    with pytest.raises(DomainError):
        bt.layers_bandlimited(1.0, 1.5)


@given(st.floats(0.01, 0.9), st.floats(0.5, 4.0))
def test_layer_counts_monotone(eps, L):
    for fam in bt.FAMILIES:
        n = bt.layers_bandlimited(L, eps, family=fam)
        assert n >= 0
        assert bt.layers_bandlimited(L, eps / 2, family=fam) >= n
        assert bt.layers_bandlimited(2 * L, eps, family=fam) >= n


def test_layers_general_d2_and_sobolev():
    assert bt.layers_bandlimited(1.0, 0.05, l=1.0001, family=bt.GENERAL, d=1) == 39
    assert bt.layers_bandlimited(1.0, 0.05, l=2.0001, family=bt.GENERAL, d=2) > 39
    assert bt.layers_sobolev(1.0, 0.5, 0.5, family=bt.WAVELET) == 3
    assert bt.layers_sobolev(1.0, 0.5, 0.5, family=bt.GENERAL) == 4


def test_fitted_log_decrement():
    assert bt.fitted_log_decrement(0.5 ** np.arange(6)) == pytest.approx(math.log(2))
