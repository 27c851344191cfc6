"""Input-signal generators: band-limited, Sobolev, cartoon and the null-set counterexample."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .spectral_core import (ConfigurationError, DomainError, FrequencyGrid, Signal,
                            band_energy_fraction, top_octave_fraction)

HEAVY_TAIL_LIMIT = 1e-6


def _unit(grid: FrequencyGrid, spectrum: np.ndarray, meta: dict) -> Signal:
    energy = float(np.sum(np.abs(spectrum) ** 2))
    if energy > 0:
        spectrum = spectrum / math.sqrt(energy)
    s = Signal.from_spectral(grid, spectrum, meta=meta)
    s.meta["top_octave_fraction"] = top_octave_fraction(s)
    return s


def gen_bandlimited(grid: FrequencyGrid, L: float, seed: int = 0) -> Signal:
    """Unit-norm signal with a random smooth spectrum vanishing for ``|w| >= L``."""
    if not 0 < L < grid.omega_max:
        raise DomainError(f"need 0 < L < omega_max = {grid.omega_max}, got L={L}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    sigma_bins = max(1.0, L / 6.0 / grid.spacing)
    smooth = (ndimage.gaussian_filter(noise.real, sigma_bins, mode="wrap")
              + 1j * ndimage.gaussian_filter(noise.imag, sigma_bins, mode="wrap"))
    window = np.clip(1.0 - (grid.radius / L) ** 2, 0.0, None) ** 2
    return _unit(grid, smooth * window, {"kind": "bandlimited", "L": L, "seed": seed})


def gen_sobolev(grid: FrequencyGrid, s: float, seed: int = 0, margin: float = 0.25) -> Signal:
    """``|f^(w)| ~ (1+|w|^2)^(-(s + d/2 + margin)/2)`` with random phases."""
    if not s > 0:
        raise DomainError(f"Sobolev order must be positive, got {s}")
    rng = np.random.default_rng(seed)
    mag = (1.0 + grid.radius**2) ** (-(s + grid.dim / 2 + margin) / 2)
    phase = np.exp(2j * np.pi * rng.random(grid.shape))
    return _unit(grid, mag * phase, {"kind": "sobolev", "s": s, "margin": margin, "seed": seed})


def gen_counterexample_signal(grid: FrequencyGrid, l: float = 2.0) -> Signal:
    """``f^(w) = (1 - |w|)_+^l``: nonnegative in space, spectrum inside the unit ball.

    Left unnormalized, so the spectrum equals the formula exactly.
    """
    if not l > math.floor(grid.dim / 2) + 1:
        raise DomainError(f"need l > floor(d/2) + 1 = {math.floor(grid.dim / 2) + 1}, got {l}")
    if grid.omega_max < 2:
        raise ConfigurationError("counterexample signal needs omega_max >= 2")
    spec = np.clip(1.0 - grid.radius, 0.0, None) ** l
    s = Signal.from_spectral(grid, spec.astype(complex), meta={"kind": "counterexample", "l": l})
    s.meta["top_octave_fraction"] = top_octave_fraction(s)
    return s


@dataclass
class Gaussians:
    """Sum of isotropic Gaussian bumps ``a * exp(-|x - c|^2 / (2 w^2))``."""

    centers: list = field(default_factory=list)
    widths: list = field(default_factory=list)
    amplitudes: list = field(default_factory=list)

    def __call__(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape)
        for c, w, a in zip(self.centers, self.widths, self.amplitudes):
            out += a * np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2) / (2 * w**2))
        return out

    def is_zero(self) -> bool:
        return not any(self.amplitudes)


@dataclass
class CartoonSpec:
    domain_center: tuple = (0.0, 0.0)
    domain_radius: float = 1.0
    f1: Gaussians = field(default_factory=Gaussians)
    f2: Gaussians = field(default_factory=lambda: Gaussians([(0.0, 0.0)], [2.0], [1.0]))
    size_K: float = 10.0

    def __post_init__(self):
        if not self.domain_radius > 0:
            raise DomainError("cartoon domain radius must be positive")
        if 2 * math.pi * self.domain_radius > self.size_K:
            raise DomainError("boundary length 2*pi*r exceeds the declared size K")

    @classmethod
    def random(cls, seed: int, period: float) -> "CartoonSpec":
        rng = np.random.default_rng(seed)
        r = period * rng.uniform(0.12, 0.22)
        c = tuple(rng.uniform(-0.1, 0.1, 2) * period)

        def bumps(k):
            return Gaussians([tuple(rng.uniform(-0.2, 0.2, 2) * period) for _ in range(k)],
                             list(rng.uniform(0.1, 0.3, k) * period),
                             list(rng.uniform(0.5, 1.5, k)))

        spec = cls(c, r, bumps(2), bumps(2), size_K=max(10.0, 2 * math.pi * r + 1.0))
        return spec


def gen_cartoon2d(grid: FrequencyGrid, spec: CartoonSpec | None = None, seed: int = 0) -> Signal:
    """Rasterize ``f1 + 1_D f2`` with ``D`` a disk (point sampling, so the jump stays sharp).

    ``spec=None`` draws a random specification from ``seed``.
    """
    if grid.dim != 2:
        raise ConfigurationError("cartoon functions are generated on 2-D grids")
    if spec is None:
        spec = CartoonSpec.random(seed, grid.period)
    half = grid.period / 2
    cx, cy = spec.domain_center
    r = spec.domain_radius
    if max(abs(cx), abs(cy)) + r >= half:
        raise DomainError("disk does not fit inside the spatial period")
    x, y = grid.positions
    inside = (x - cx) ** 2 + (y - cy) ** 2 <= r**2
    f2 = spec.f2(x, y)
    if np.max(np.abs(f2)) > spec.size_K:
        raise DomainError("sup-norm of f2 exceeds the declared size K")
    values = spec.f1(x, y) + np.where(inside, f2, 0.0)
    sig = Signal.from_spatial(grid, values.astype(complex),
                              meta={"kind": "cartoon", "seed": seed, "heavy_tailed": True})
    sig.meta["top_octave_fraction"] = top_octave_fraction(sig)
    return sig


def in_band_report(f: Signal) -> dict:
    """Trust indicators for grid truncation."""
    frac = top_octave_fraction(f)
    return {
        "top_octave_fraction": frac,
        "nyquist_half_fraction": band_energy_fraction(f, 0.0, f.grid.omega_max / 2),
        "heavy_tailed": bool(f.meta.get("heavy_tailed", False)),
        "accepted": bool(f.meta.get("heavy_tailed", False)) or frac <= HEAVY_TAIL_LIMIT,
    }
