"""Periodic-grid stand-in for L^2(R^d).

Spectral arrays are stored *centered*: index ``k`` along an axis holds the
frequency ``(k - n/2) * spacing``, so the lattice runs from ``-omega_max`` to
``omega_max - spacing``.  Spatial arrays use the same centered order, index
``k`` holding position ``(k - n/2) * dx``.  The transform is the unitary DFT, hence

    sum |f(x_k)|^2 == sum |f_hat(omega_k)|^2

and every energy in this package is such a plain sum of squared magnitudes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class ConfigurationError(ValueError):
    """Grid or filter-bank parameters that cannot be realized."""


class DimensionError(ValueError):
    """Operands living on different grids."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrequencyGrid:
    """Discretized frequency lattice ``{-omega_max + k*spacing}`` per axis.

    The matching spatial lattice has step ``1 / (2*omega_max)`` and period
    ``1 / spacing``, centered on the origin.
    """

    dim: int
    samples_per_axis: int
    omega_max: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        n = self.samples_per_axis
        if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 8:
            raise ConfigurationError(
                f"samples_per_axis must be a power of two >= 8, got {n}"
            )
        if not self.omega_max > 0:
            raise ConfigurationError(f"omega_max must be positive, got {self.omega_max}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.omega_max / self.samples_per_axis

    @property
    def dx(self) -> float:
        """Spatial sample step."""
        return 1.0 / (2.0 * self.omega_max)

    @property
    def period(self) -> float:
        """Spatial period of the grid."""
        return self.samples_per_axis * self.dx

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.samples_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.samples_per_axis**self.dim

    @cached_property
    def axis_frequencies(self) -> np.ndarray:
        n = self.samples_per_axis
        # integer offsets keep the lattice exactly symmetric: -w_k == w_{n-k}
        return (np.arange(n) - n // 2) * self.spacing

    @cached_property
    def axis_positions(self) -> np.ndarray:
        n = self.samples_per_axis
        return (np.arange(n) - n // 2) * self.dx

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Per-axis frequency meshes, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*([self.axis_frequencies] * self.dim), indexing="ij"))

    @cached_property
    def positions(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis_positions] * self.dim), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        """``|omega|`` on every bin."""
        return np.sqrt(sum(w**2 for w in self.frequencies))

    def refined(self) -> "FrequencyGrid":
        """Twice the samples over the same spatial period (omega_max doubles)."""
        return FrequencyGrid(self.dim, 2 * self.samples_per_axis, 2.0 * self.omega_max)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "samples_per_axis": int(self.samples_per_axis),
            "omega_max": float(self.omega_max),
        }


def _axes(grid: FrequencyGrid) -> tuple[int, ...]:
    return tuple(range(-grid.dim, 0))


def to_spectrum(spatial: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Unitary DFT from centered spatial order to centered spectral order."""
    axes = _axes(grid)
    spatial = np.fft.ifftshift(spatial, axes=axes)
    return np.fft.fftshift(np.fft.fftn(spatial, axes=axes, norm="ortho"), axes=axes)


def to_spatial(spectral: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    axes = _axes(grid)
    spatial = np.fft.ifftn(np.fft.ifftshift(spectral, axes=axes), axes=axes, norm="ortho")
    return np.fft.fftshift(spatial, axes=axes)


class Signal:
    """Complex samples on a grid with lazily synchronized dual domains.

    Construct with :meth:`from_spatial` or :meth:`from_spectral`.  The missing
    domain is filled on first access; the fill is deterministic, so two
    threads racing on it store identical arrays.
    """

    __slots__ = ("grid", "_spatial", "_spectral", "meta")

    def __init__(self, grid: FrequencyGrid, spatial=None, spectral=None, meta=None):
        if spatial is None and spectral is None:
            raise ValueError("a Signal needs at least one domain")
        self.grid = grid
        self._spatial = None if spatial is None else self._checked(spatial)
        self._spectral = None if spectral is None else self._checked(spectral)
        self.meta = dict(meta or {})

    def _checked(self, arr) -> np.ndarray:
        arr = np.asarray(arr, dtype=complex)
        if arr.shape != self.grid.shape:
            if arr.size != self.grid.size:
                raise DimensionError(
                    f"array of shape {arr.shape} does not fit grid {self.grid.shape}"
                )
            arr = arr.reshape(self.grid.shape)
        arr = arr.copy()
        arr.flags.writeable = False
        return arr

    @classmethod
    def from_spatial(cls, grid, values, meta=None) -> "Signal":
        return cls(grid, spatial=values, meta=meta)

    @classmethod
    def from_spectral(cls, grid, values, meta=None) -> "Signal":
        return cls(grid, spectral=values, meta=meta)

    @classmethod
    def zeros(cls, grid) -> "Signal":
        z = np.zeros(grid.shape, complex)
        return cls(grid, spatial=z, spectral=z)

    @property
    def valid_domains(self) -> frozenset:
        out = set()
        if self._spatial is not None:
            out.add("spatial")
        if self._spectral is not None:
            out.add("spectral")
        return frozenset(out)

    @property
    def spatial(self) -> np.ndarray:
        if self._spatial is None:
            arr = to_spatial(self._spectral, self.grid)
            arr.flags.writeable = False
            self._spatial = arr
        return self._spatial

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            arr = to_spectrum(self._spatial, self.grid)
            arr.flags.writeable = False
            self._spectral = arr
        return self._spectral

    def energy(self) -> float:
        """Squared 2-norm, taken in whichever domain is already available."""
        arr = self._spatial if self._spatial is not None else self._spectral
        return float(np.sum(arr.real**2 + arr.imag**2))

    def scaled(self, c) -> "Signal":
        return Signal(
            self.grid,
            spatial=None if self._spatial is None else c * self._spatial,
            spectral=None if self._spectral is None else c * self._spectral,
            meta=self.meta,
        )

    def __repr__(self):
        return f"Signal(grid={self.grid}, domains={sorted(self.valid_domains)})"


def _require_same_grid(a: FrequencyGrid, b: FrequencyGrid):
    if a != b:
        raise DimensionError(f"grid mismatch: {a} vs {b}")


def forward_transform(s: Signal) -> Signal:
    """Return a copy of ``s`` with the spectral domain computed from the spatial one."""
    if "spatial" not in s.valid_domains:
        raise DomainError("forward_transform needs a valid spatial domain")
    return Signal(s.grid, spatial=s.spatial, spectral=to_spectrum(s.spatial, s.grid), meta=s.meta)


def inverse_transform(s: Signal) -> Signal:
    if "spectral" not in s.valid_domains:
        raise DomainError("inverse_transform needs a valid spectral domain")
    return Signal(s.grid, spatial=to_spatial(s.spectral, s.grid), spectral=s.spectral, meta=s.meta)


def l2_norm(s: Signal, domain: str | None = None) -> float:
    if domain is None:
        return float(np.sqrt(s.energy()))
    arr = {"spatial": s.spatial, "spectral": s.spectral}[domain]
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def convolve(f: Signal, g: Signal) -> Signal:
    """Circular convolution ``sum_k f[k] g[m-k]`` via spectral multiplication.

    With the unitary transform this means ``(f*g)^ = sqrt(N) f^ g^``; the unit
    impulse (1 at the origin sample, 0 elsewhere) is the identity.
    """
    _require_same_grid(f.grid, g.grid)
    return Signal.from_spectral(f.grid, np.sqrt(f.grid.size) * f.spectral * g.spectral)


def apply_transfer(f: Signal, transfer: np.ndarray) -> Signal:
    """Filter ``f`` by a frequency response given on the centered lattice."""
    transfer = np.asarray(transfer)
    if transfer.shape != f.grid.shape:
        raise DimensionError(f"transfer shape {transfer.shape} != grid {f.grid.shape}")
    return Signal.from_spectral(f.grid, f.spectral * transfer)


def impulse(grid: FrequencyGrid) -> Signal:
    """Unit impulse at the spatial origin; its transfer function is identically 1."""
    x = np.zeros(grid.shape, complex)
    x[(grid.samples_per_axis // 2,) * grid.dim] = 1.0
    return Signal.from_spatial(grid, x)


def modulus(f: Signal) -> Signal:
    return Signal.from_spatial(f.grid, np.abs(f.spatial))


def sobolev_norm(f: Signal, s: float) -> float:
    """``(sum |f^(w)|^2 (1+|w|^2)^s)^(1/2)`` over the lattice."""
    if s < 0:
        raise DomainError(f"Sobolev order must be >= 0, got {s}")
    weight = (1.0 + f.grid.radius**2) ** s
    return float(np.sqrt(np.sum(np.abs(f.spectral) ** 2 * weight)))


def band_energy_fraction(f: Signal, r_low: float = 0.0, r_high: float = np.inf) -> float:
    """Fraction of spectral energy on bins with ``r_low <= |w| < r_high``."""
    p = np.abs(f.spectral) ** 2
    total = p.sum()
    if total == 0:
        return 0.0
    mask = (f.grid.radius >= r_low) & (f.grid.radius < r_high)
    return float(p[mask].sum() / total)


def top_octave_fraction(f: Signal) -> float:
    """Energy fraction on bins with some component beyond ``omega_max / 2``.

    Used as a trust indicator for periodic-grid truncation.
    """
    p = np.abs(f.spectral) ** 2
    total = p.sum()
    if total == 0:
        return 0.0
    half = f.grid.omega_max / 2
    mask = np.zeros(f.grid.shape, bool)
    for w in f.grid.frequencies:
        mask |= np.abs(w) > half
    return float(p[mask].sum() / total)
