"""Per-layer filter collections ``{chi} U {g_lambda}`` and their certification.

Filters are frequency responses sampled on the centered lattice of a
:class:`~scattering_energy.spectral_core.FrequencyGrid`.  Filtering a signal
multiplies its spectrum by the response.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .spectral_core import ConfigurationError, DomainError, FrequencyGrid

SUPPORT_TOL = 1e-9
GAP_TOL = 1e-9
UNDERFLOW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Filter:
    spectral_samples: np.ndarray
    index: Hashable
    role: str = "band_pass"
    orthant_tag: np.ndarray | None = None

    def __post_init__(self):
        arr = np.array(self.spectral_samples)
        if not np.iscomplexobj(arr):
            arr = arr.astype(float)
        arr.flags.writeable = False
        object.__setattr__(self, "spectral_samples", arr)
        if self.role not in ("band_pass", "output_generating"):
            raise ValueError(f"unknown filter role {self.role!r}")
        if self.orthant_tag is not None:
            tag = np.array(self.orthant_tag, dtype=float)
            tag.flags.writeable = False
            object.__setattr__(self, "orthant_tag", tag)

    @property
    def power(self) -> np.ndarray:
        a = self.spectral_samples
        return a.real**2 + a.imag**2 if np.iscomplexobj(a) else a**2

    def scaled(self, c) -> "Filter":
        return Filter(c * self.spectral_samples, self.index, self.role, self.orthant_tag)


def _lp_profile(chi: Filter, band_filters: Sequence[Filter]) -> np.ndarray:
    prof = chi.power.copy()
    for g in band_filters:
        prof += g.power
    return prof


def _band_power(band_filters: Sequence[Filter], shape) -> np.ndarray:
    total = np.zeros(shape)
    for g in band_filters:
        total += g.power
    return total


def measure_spectral_gap(grid: FrequencyGrid, band_power: np.ndarray, gap_tol: float = GAP_TOL) -> float:
    """Largest ``r`` with ``sum |g_lambda|^2 <= gap_tol`` on every bin ``|w| < r``.

    On the lattice this is the smallest radius carrying band-filter power.
    """
    on = band_power > gap_tol
    if not on.any():
        return math.inf
    return float(grid.radius[on].min())


@dataclass(frozen=True, eq=False)
class FilterBank:
    """One layer's filters plus Littlewood-Paley metadata (computed on construction)."""

    grid: FrequencyGrid
    chi: Filter
    band_filters: tuple[Filter, ...]
    name: str = "custom"
    params: dict = field(default_factory=dict)
    lp_profile: np.ndarray = field(init=False, repr=False)
    frame_lower: float = field(init=False)
    frame_upper: float = field(init=False)
    spectral_gap: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "band_filters", tuple(self.band_filters))
        for flt in (self.chi, *self.band_filters):
            if flt.spectral_samples.shape != self.grid.shape:
                raise ConfigurationError(
                    f"filter {flt.index!r} has shape {flt.spectral_samples.shape}, "
                    f"grid expects {self.grid.shape}"
                )
        if self.chi.role != "output_generating":
            object.__setattr__(self, "chi", Filter(self.chi.spectral_samples, self.chi.index,
                                                   "output_generating", self.chi.orthant_tag))
        prof = _lp_profile(self.chi, self.band_filters)
        prof.flags.writeable = False
        object.__setattr__(self, "lp_profile", prof)
        object.__setattr__(self, "frame_lower", float(prof.min()))
        object.__setattr__(self, "frame_upper", float(prof.max()))
        gap = measure_spectral_gap(self.grid, self.band_power())
        object.__setattr__(self, "spectral_gap", gap)

    def __len__(self):
        return len(self.band_filters)

    @property
    def labels(self) -> list:
        return [g.index for g in self.band_filters]

    def band_power(self) -> np.ndarray:
        return _band_power(self.band_filters, self.grid.shape)

    def scaled(self, c: float) -> "FilterBank":
        return FilterBank(self.grid, self.chi.scaled(c),
                          tuple(g.scaled(c) for g in self.band_filters),
                          name=self.name, params={**self.params, "scale": c})


def with_residual_chi(grid, band_filters, name, params, chi_index="chi") -> FilterBank:
    """Complete band filters into a Parseval bank by ``chi = sqrt((1 - sum|g|^2)_+)``."""
    resid = np.clip(1.0 - _band_power(band_filters, grid.shape), 0.0, None)
    chi = Filter(np.sqrt(resid), chi_index, role="output_generating")
    return FilterBank(grid, chi, tuple(band_filters), name=name, params=params)


# --- Meyer wavelets ---------------------------------------------------------

def meyer_transition(t):
    """``35t^4 - 84t^5 + 70t^6 - 20t^7`` clipped to [0, 1]; satisfies nu(t) + nu(1-t) = 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**4 * (35 - 84 * t + 70 * t**2 - 20 * t**3)


def meyer_mother_hat(omega):
    """Analytic Meyer mother wavelet in frequency, supported on [1/2, 2]."""
    w = np.asarray(omega, dtype=float)
    out = np.zeros_like(w)
    rise = (w >= 0.5) & (w <= 1.0)
    fall = (w > 1.0) & (w <= 2.0)
    out[rise] = np.sin(0.5 * np.pi * meyer_transition(2 * w[rise] - 1))
    out[fall] = np.cos(0.5 * np.pi * meyer_transition(w[fall] - 1))
    return out


def build_meyer_wavelet_bank(grid: FrequencyGrid, j_max: int) -> FilterBank:
    """Dyadic analytic Meyer bank ``g_j(w) = psi(2^-j w)``, ``g_-j(w) = psi(-2^-j w)``."""
    if grid.dim != 1:
        raise ConfigurationError("the Meyer wavelet bank is one-dimensional")
    if j_max < 1:
        raise DomainError(f"j_max must be >= 1, got {j_max}")
    if 2.0 ** (j_max + 1) > grid.omega_max:
        raise ConfigurationError(
            f"top band reaches 2^{j_max + 1} = {2.0 ** (j_max + 1)} > omega_max = {grid.omega_max}"
        )
    w = grid.axis_frequencies
    filters = []
    for j in range(1, j_max + 1):
        filters.append(Filter(meyer_mother_hat(w / 2.0**j), j, orthant_tag=[[1.0]]))
        filters.append(Filter(meyer_mother_hat(-w / 2.0**j), -j, orthant_tag=[[-1.0]]))
    return with_residual_chi(grid, filters, "meyer", {"j_max": j_max})


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def build_meyer_2d_bank(grid: FrequencyGrid, j_max: int, theta0: float = 0.0) -> FilterBank:
    """Radial Meyer scales times four quadrant indicators (rotated by ``theta0``).

    Filter ``"j:q"`` is supported in the closed quadrant ``R(theta0 + q*pi/2) H``
    with ``H`` the positive quadrant; its orthant tag is that rotation.
    """
    if grid.dim != 2:
        raise ConfigurationError("the quadrant Meyer bank is two-dimensional")
    if j_max < 1:
        raise DomainError(f"j_max must be >= 1, got {j_max}")
    if 2.0 ** (j_max + 1) > grid.omega_max:
        raise ConfigurationError("top band exceeds omega_max")
    wx, wy = grid.frequencies
    r = grid.radius
    phase = np.mod(np.arctan2(wy, wx) - theta0, 2 * np.pi)
    quadrant = np.minimum((phase // (np.pi / 2)).astype(int), 3)
    filters = []
    for j in range(1, j_max + 1):
        radial = meyer_mother_hat(r / 2.0**j)
        for q in range(4):
            filters.append(Filter(np.where(quadrant == q, radial, 0.0), f"{j}:{q}",
                                  orthant_tag=rotation(theta0 + q * np.pi / 2)))
    return with_residual_chi(grid, filters, "meyer2d", {"j_max": j_max, "theta0": theta0})


# --- Weyl-Heisenberg --------------------------------------------------------

def wh_prototype_hat(omega, R: float):
    """``cos(pi w / (2R))`` on ``|w| < R``, zero elsewhere; even in ``w``."""
    a = np.abs(np.asarray(omega, dtype=float))
    return np.where(a < R, np.cos(np.pi * a / (2 * R)), 0.0)


def build_weyl_heisenberg_bank(grid: FrequencyGrid, R: float, k_max: int) -> FilterBank:
    """Modulated prototypes ``g_k(w) = g(w - R(k+1))``, ``g_-k(w) = g(w + R(k+1))``."""
    if grid.dim != 1:
        raise ConfigurationError("the Weyl-Heisenberg bank is one-dimensional")
    if not R > 0 or k_max < 1:
        raise DomainError(f"need R > 0 and k_max >= 1, got R={R}, k_max={k_max}")
    if R * (k_max + 2) > grid.omega_max:
        raise ConfigurationError(
            f"R*(k_max+2) = {R * (k_max + 2)} exceeds omega_max = {grid.omega_max}"
        )
    w = grid.axis_frequencies
    filters = []
    for k in range(1, k_max + 1):
        c = R * (k + 1)
        filters.append(Filter(wh_prototype_hat(w - c, R), k, orthant_tag=[[1.0]]))
        filters.append(Filter(wh_prototype_hat(w + c, R), -k, orthant_tag=[[-1.0]]))
    return with_residual_chi(grid, filters, "wh", {"R": R, "k_max": k_max})


# --- null-set counterexample -------------------------------------------------

def build_counterexample_bank(grid: FrequencyGrid, l: float | None = None) -> FilterBank:
    """Indicator partition: ``g_0`` on ``|w| <= 1``, ``chi`` on ``1 < |w| <= 2``, ``g_1`` beyond.

    Parseval, but ``g_0`` is neither high-pass nor orthant-supported.
    """
    if grid.omega_max < 4:
        raise ConfigurationError("counterexample bank needs omega_max >= 4")
    r = grid.radius
    g0 = Filter((r <= 1.0).astype(float), 0)
    chi = Filter(((r > 1.0) & (r <= 2.0)).astype(float), "chi", role="output_generating")
    g1 = Filter((r > 2.0).astype(float), 1)
    params = {} if l is None else {"l": l}
    return FilterBank(grid, chi, (g0, g1), name="counterexample", params=params)


def bank_from_arrays(grid, chi, bands, labels=None, orthant_tags=None, name="custom") -> FilterBank:
    labels = list(range(1, len(bands) + 1)) if labels is None else list(labels)
    tags = [None] * len(bands) if orthant_tags is None else list(orthant_tags)
    return FilterBank(
        grid,
        Filter(chi, "chi", role="output_generating"),
        tuple(Filter(b, lab, orthant_tag=t) for b, lab, t in zip(bands, labels, tags)),
        name=name,
    )


# --- certification ------------------------------------------------------------

def frame_bounds(bank: FilterBank) -> tuple[float, float]:
    """Littlewood-Paley bounds ``(min, max)`` of ``|chi|^2 + sum |g|^2`` over the lattice."""
    if not bank.band_filters and not np.any(bank.chi.spectral_samples):
        raise DomainError("empty filter bank")
    return bank.frame_lower, bank.frame_upper


@dataclass
class OrthantVerdict:
    index: Hashable
    verdict: str  # "pass", "fail" or "undetermined"
    orthant: np.ndarray | None = None
    reason: str = ""


@dataclass
class AssumptionReport:
    filters: list
    delta: float
    gap_ok: bool
    passed: bool
    reasons: list

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"admissibility {status}: spectral gap delta = {self.delta:.6g}"]
        lines += [f"  {r}" for r in self.reasons]
        return "\n".join(lines)


_AXIS_ORTHANTS_2D = [np.diag(s) for s in ([1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0])]


def _in_orthant(points: np.ndarray, A: np.ndarray, slack: float) -> bool:
    # points: (m, d); orthant {w : A^T w >= 0}
    return bool(np.all(points @ A >= -slack))


def _orthant_verdict(grid, g: Filter, support_tol: float) -> OrthantVerdict:
    mask = np.abs(g.spectral_samples) > support_tol
    pts = np.stack([w[mask] for w in grid.frequencies], axis=-1)
    slack = support_tol * grid.omega_max
    if pts.size == 0:
        return OrthantVerdict(g.index, "pass", None, "empty support")
    if grid.dim == 1:
        for A in (np.array([[1.0]]), np.array([[-1.0]])):
            if _in_orthant(pts, A, slack):
                return OrthantVerdict(g.index, "pass", A)
        return OrthantVerdict(g.index, "fail", None,
                              f"filter {g.index!r}: support meets both half-lines")
    candidates = ([g.orthant_tag] if g.orthant_tag is not None else []) + _AXIS_ORTHANTS_2D
    for A in candidates:
        if _in_orthant(pts, A, slack):
            return OrthantVerdict(g.index, "pass", A)
    # A closed orthant never holds both w != 0 and -w: antipodal support certifies failure.
    key = {tuple(np.round(p / grid.spacing).astype(int)) for p in pts if np.hypot(*p) > slack}
    if any(tuple(-k for k in p) in key for p in key):
        return OrthantVerdict(g.index, "fail", None,
                              f"filter {g.index!r}: support contains antipodal frequencies")
    return OrthantVerdict(g.index, "undetermined", None,
                          f"filter {g.index!r}: no declared or axis-aligned orthant contains the support")


def check_admissibility(bank: FilterBank, support_tol: float = SUPPORT_TOL,
                      gap_tol: float = GAP_TOL) -> AssumptionReport:
    """Analyticity (orthant support) and high-pass (spectral gap) check."""
    verdicts = [_orthant_verdict(bank.grid, g, support_tol) for g in bank.band_filters]
    delta = measure_spectral_gap(bank.grid, bank.band_power(), gap_tol)
    gap_ok = delta > 0
    reasons = [v.reason for v in verdicts if v.verdict != "pass"]
    if not gap_ok:
        bad = [g.index for g in bank.band_filters
               if (g.power > gap_tol)[bank.grid.radius == bank.grid.radius.min()].any()]
        reasons.append(f"no spectral gap: band power at w = 0 from filters {bad}; "
                       "B_delta(0) is met for every delta > 0")
    passed = gap_ok and all(v.verdict == "pass" for v in verdicts)
    return AssumptionReport(verdicts, delta, gap_ok, passed, reasons)


def normalize_to_parseval(bank: FilterBank, underflow_tol: float = UNDERFLOW_TOL) -> FilterBank:
    """Divide every filter by ``sqrt(lp_profile)``; bins below ``underflow_tol`` are zeroed."""
    if bank.frame_lower <= 0:
        raise ConfigurationError("cannot normalize: lower frame bound is 0")
    prof = bank.lp_profile
    ok = prof >= underflow_tol
    inv = np.zeros_like(prof)
    inv[ok] = 1.0 / np.sqrt(prof[ok])

    def norm(f: Filter) -> Filter:
        return Filter(f.spectral_samples * inv, f.index, f.role, f.orthant_tag)

    return FilterBank(bank.grid, norm(bank.chi), tuple(norm(g) for g in bank.band_filters),
                      name=bank.name, params={**bank.params, "normalized": True})


class ModuleSequence:
    """Ordered banks ``Psi_1, Psi_2, ...``; with ``repeating=True`` the last bank is reused forever."""

    def __init__(self, layers: Sequence[FilterBank], repeating: bool = False):
        if not layers:
            raise ValueError("a module sequence needs at least one bank")
        grids = {b.grid for b in layers}
        if len(grids) != 1:
            raise ConfigurationError("all banks of a module sequence must share one grid")
        self.layers = tuple(layers)
        self.repeating = repeating

    @classmethod
    def repeat(cls, bank: FilterBank) -> "ModuleSequence":
        return cls([bank], repeating=True)

    @property
    def grid(self) -> FrequencyGrid:
        return self.layers[0].grid

    @property
    def max_depth(self) -> float:
        return math.inf if self.repeating else len(self.layers)

    def bank(self, n: int) -> FilterBank:
        """Bank of layer ``n`` (1-based)."""
        if n < 1:
            raise IndexError("layers are numbered from 1")
        if n > len(self.layers):
            if not self.repeating:
                raise IndexError(f"module sequence has only {len(self.layers)} layers")
            return self.layers[-1]
        return self.layers[n - 1]

    def products(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """Running ``prod min{1, A_k}`` and ``prod max{1, B_k}`` for ``N = 0..N``."""
        a = [1.0]
        b = [1.0]
        for k in range(1, N + 1):
            bank = self.bank(k)
            a.append(a[-1] * min(1.0, bank.frame_lower))
            b.append(b[-1] * max(1.0, bank.frame_upper))
        return np.array(a), np.array(b)
