"""Closed-form energy-decay bounds and layer-count estimates.

All integrals are lattice Riemann sums in the package's unitary convention,
``int |f^(w)|^2 h(w) dw  ->  sum_k |f^_k|^2 h(w_k)``, which is the same
convention in which measured energies ``W_N`` are computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .spectral_core import DomainError, Signal

GENERAL = "general_polynomial"
WAVELET = "wavelet_exponential"
WEYL_HEISENBERG = "weyl_heisenberg_exponential"
FAMILIES = (GENERAL, WAVELET, WEYL_HEISENBERG)

DECAY_FACTOR = {WAVELET: 5.0 / 3.0, WEYL_HEISENBERG: 1.5}
_FAMILY_ALIASES = {
    "general": GENERAL, "polynomial": GENERAL, GENERAL: GENERAL,
    "wavelet": WAVELET, "wavelets": WAVELET, "meyer": WAVELET, WAVELET: WAVELET,
    "wh": WEYL_HEISENBERG, "weyl-heisenberg": WEYL_HEISENBERG, WEYL_HEISENBERG: WEYL_HEISENBERG,
}
# pushes values sitting on an integer boundary down before the ceiling
CEIL_NUDGE = 1e-12


def family_name(family: str) -> str:
    try:
        return _FAMILY_ALIASES[family]
    except KeyError:
        raise DomainError(f"unknown bound family {family!r}") from None


@dataclass
class BoundParams:
    family: str = GENERAL
    d: int = 1
    l: float = 1.0001
    delta: float = 1.0
    R: float = 1.0
    B_products: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.family = family_name(self.family)
        if self.family == GENERAL and not self.l > math.floor(self.d / 2) + 1:
            raise DomainError(f"general bound needs l > floor(d/2) + 1, got l={self.l}, d={self.d}")
        if self.family != GENERAL:
            if self.d != 1:
                raise DomainError("exponential bounds are one-dimensional")
            if not self.l > 1:
                raise DomainError(f"exponential bounds need l > 1, got {self.l}")
        if not self.delta > 0:
            raise DomainError("delta must be positive")

    def B(self, N: int) -> float:
        if self.B_products is None:
            raise DomainError("B_products missing for the general polynomial bound")
        return float(self.B_products[N])


def alpha_exponent(d: int) -> float:
    """Depth exponent of the polynomial bound: 1 for d = 1, ``log2 sqrt(d/(d-1/2))`` otherwise."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if d == 1:
        return 1.0
    return 0.5 * math.log2(d / (d - 0.5))


def sobolev_decay_exponent(s: float) -> float:
    if not s > 0:
        raise DomainError(f"Sobolev order must be positive, got {s}")
    return min(1.0, 2.0 * s)


def r_hat_l(omega_norm, l: float):
    """``(1 - |w|)_+^l`` evaluated at ``|w|``."""
    if not l > 0:
        raise DomainError(f"l must be positive, got {l}")
    x = np.asarray(omega_norm, dtype=float)
    if np.any(x < 0):
        raise DomainError("omega_norm must be nonnegative")
    out = np.where(x < 1.0, np.clip(1.0 - x, 0.0, None) ** l, 0.0)
    return float(out) if out.ndim == 0 else out


def _spectrum_power(f_spec) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(f_spec, Signal):
        return np.abs(f_spec.spectral) ** 2, f_spec.grid.radius
    spec, radius = f_spec
    return np.abs(np.asarray(spec)) ** 2, np.asarray(radius)


def bound_scale(N: int, p: BoundParams) -> float:
    """Radius by which ``|w|`` is divided inside ``r_hat_l`` at depth ``N``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if p.family == GENERAL:
        return N ** alpha_exponent(p.d) * p.delta
    if p.family == WAVELET:
        return (5.0 / 3.0) ** (N - 1)
    return 1.5 ** (N - 1) * p.R


def bound_bracket(radius, N: int, p: BoundParams) -> np.ndarray:
    """``1 - r_hat_l(|w| / scale)^2``."""
    return 1.0 - r_hat_l(np.asarray(radius, dtype=float) / bound_scale(N, p), p.l) ** 2


def bound_polynomial(f_spec, N: int, p: BoundParams) -> float:
    """``B^N sum |f^|^2 (1 - r_hat_l(w / (N^alpha delta))^2)``.

    ``f_spec`` is a :class:`Signal` or a ``(spectrum, radius)`` pair.
    """
    if p.family != GENERAL:
        raise DomainError(f"bound_polynomial needs the general family, got {p.family}")
    power, radius = _spectrum_power(f_spec)
    return p.B(N) * float(np.sum(power * bound_bracket(radius, N, p)))


def bound_exponential(f_spec, N: int, p: BoundParams) -> float:
    """Wavelet (``(5/3)^(N-1)``) or Weyl-Heisenberg (``(3/2)^(N-1) R``) bound; Parseval banks."""
    if p.family == GENERAL:
        raise DomainError("bound_exponential needs an exponential family")
    power, radius = _spectrum_power(f_spec)
    return float(np.sum(power * bound_bracket(radius, N, p)))


def bound(f_spec, N: int, p: BoundParams) -> float:
    return bound_polynomial(f_spec, N, p) if p.family == GENERAL else bound_exponential(f_spec, N, p)


def _ceil(x) -> int:
    return int(mpmath.ceil(mpmath.mpf(x) - CEIL_NUDGE))


def _check_eps(eps):
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")


def _layers_from_argument(arg, family: str, d: int) -> int:
    if family == GENERAL:
        return _ceil(arg ** (mpmath.mpf(1) / mpmath.mpf(alpha_exponent(d))) - 1)
    a = mpmath.mpf(5) / 3 if family == WAVELET else mpmath.mpf(3) / 2
    return _ceil(mpmath.log(arg) / mpmath.log(a))


def layers_bandlimited(L: float, eps: float, l: float = 1.0001, delta: float = 1.0,
                       family: str = WAVELET, d: int = 1) -> int:
    """Depth guaranteeing that features of layers ``0..N`` hold ``(1-eps)`` of the energy of an L-band-limited signal."""
    _check_eps(eps)
    if not L > 0 or not delta > 0:
        raise DomainError("L and delta must be positive")
    family = family_name(family)
    with mpmath.workdps(40):
        one = mpmath.mpf(1)
        arg = mpmath.mpf(L) / ((one - (one - mpmath.mpf(eps)) ** (one / (2 * mpmath.mpf(l))))
                               * mpmath.mpf(delta))
        return _layers_from_argument(arg, family, d)


def layers_sobolev(f_sobolev_ratio: float, s: float, eps: float, l: float = 1.0001,
                   delta: float = 1.0, family: str = WAVELET, d: int = 1) -> int:
    """Same guarantee for ``f`` in ``H^s``, given ``||f||_{H^s} / ||f||_2``."""
    _check_eps(eps)
    if not f_sobolev_ratio > 0:
        raise DomainError("Sobolev-to-L2 norm ratio must be positive")
    gamma = sobolev_decay_exponent(s)
    family = family_name(family)
    with mpmath.workdps(40):
        g = mpmath.mpf(gamma)
        arg = (2 * mpmath.mpf(l) * mpmath.mpf(f_sobolev_ratio) ** (2 / g)
               / (mpmath.mpf(eps) ** (1 / g) * mpmath.mpf(delta)))
        return _layers_from_argument(arg, family, d)


def frame_bound_products(omega, N: int) -> tuple[float, float]:
    a, b = omega.products(N)
    return float(a[N]), float(b[N])


TABLE_EPS_COMPLEMENTS = (0.25, 0.5, 0.75, 0.9, 0.95, 0.99)
TABLE_EXPECTED = {
    WAVELET: (2, 3, 4, 6, 8, 11),
    WEYL_HEISENBERG: (2, 4, 5, 8, 10, 14),
    GENERAL: (2, 3, 7, 19, 39, 199),
}


def layers_table(L: float = 1.0, delta: float = 1.0, l: float = 1.0001, d: int = 1,
                 complements=TABLE_EPS_COMPLEMENTS) -> dict[str, list[int]]:
    """Layer counts per family for each captured fraction ``1 - eps``."""
    out = {}
    for fam in (WAVELET, WEYL_HEISENBERG, GENERAL):
        out[fam] = [layers_bandlimited(L, 1.0 - c, l, delta, fam, d) for c in complements]
    return out


def fitted_log_decrement(values) -> float:
    """Negative least-squares slope of ``log values`` against the layer index."""
    v = np.asarray(values, dtype=float)
    n = np.arange(v.size)
    slope = np.polyfit(n, np.log(v), 1)[0]
    return float(-slope)
