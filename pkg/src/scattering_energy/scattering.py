"""Scattering tree propagation with per-layer energy bookkeeping.

Layer ``n`` holds the feature maps ``U[q]f = |...|f * g_1| * ... * g_n|`` for
paths ``q`` of length ``n``.  For each of them we record

* its energy (contributing to ``W[n]``),
* for ``n < N``, the energy of its feature ``U[q]f * chi_{n+1}`` (``F[n]``).

Energies of depth-``N`` maps come from ``|U[q]f^|^2`` against ``|g|^2`` of the
parent, so the last layer is never materialized.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .filter_banks import GAP_TOL, Filter, FilterBank, ModuleSequence
from .spectral_core import DimensionError, DomainError, Signal, modulus, apply_transfer

DEFAULT_PRUNE_TOL = 1e-8
DEFAULT_PATH_CAP = 10_000
# rows per batched FFT; fixed so results never depend on the worker count
BLOCK_ROWS = 256


@dataclass(frozen=True)
class Path:
    indices: tuple = ()

    @property
    def length(self) -> int:
        return len(self.indices)

    def __str__(self):
        return "e" if not self.indices else "/".join(str(i) for i in self.indices)


@dataclass
class PathRecord:
    path: Path
    map_energy: float
    feature_energy: float | None
    pruned: bool = False


@dataclass
class ScatteringResult:
    depth: int
    layer_energies: np.ndarray
    feature_energies: np.ndarray
    pruned_energy: np.ndarray
    input_energy: float
    node_counts: np.ndarray
    per_path: list | None = None
    config: dict = field(default_factory=dict)

    # short aliases matching the usual notation
    @property
    def W(self) -> np.ndarray:
        return self.layer_energies

    @property
    def F(self) -> np.ndarray:
        return self.feature_energies

    def captured(self, N: int | None = None) -> float:
        """``sum_{n<N} F[n]`` (all layers when ``N`` is None)."""
        N = self.depth if N is None else N
        return math.fsum(self.feature_energies[:N])

    def cumulative_pruned(self, N: int) -> float:
        return math.fsum(self.pruned_energy[: N + 1])

    def conservation_residual(self) -> float:
        """``|sum F + W_N + pruned - ||f||^2| / ||f||^2`` (0 for the zero signal)."""
        if self.input_energy == 0:
            return 0.0
        total = self.captured() + self.layer_energies[-1] + self.cumulative_pruned(self.depth)
        return abs(total - self.input_energy) / self.input_energy

    def rows(self) -> list[dict]:
        out = []
        for n in range(self.depth + 1):
            out.append({
                "layer": n,
                "W": float(self.layer_energies[n]),
                "F": float(self.feature_energies[n]) if n < self.depth else None,
                "pruned": float(self.pruned_energy[n]),
                "nodes": int(self.node_counts[n]),
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer", "W", "F", "pruned"])
        for r in self.rows():
            w.writerow([r["layer"], repr(r["W"]), "" if r["F"] is None else repr(r["F"]),
                        repr(r["pruned"])])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "depth": self.depth,
            "input_energy": self.input_energy,
            "layers": self.rows(),
        }
        if self.per_path is not None:
            doc["per_path"] = [
                {"path": str(r.path), "map_energy": r.map_energy,
                 "feature_energy": r.feature_energy, "pruned": r.pruned}
                for r in self.per_path
            ]
        return json.dumps(doc, indent=2, sort_keys=True)


def propagate_node(f: Signal, g: Filter) -> Signal:
    """``U[lambda] f = |f * g_lambda|``."""
    return modulus(extract_feature(f, g))


def extract_feature(f: Signal, chi: Filter) -> Signal:
    if chi.spectral_samples.shape != f.grid.shape:
        raise DimensionError("filter and signal live on different grids")
    return apply_transfer(f, chi.spectral_samples)


class _Layer:
    """A bank's responses flattened in unshifted FFT order."""

    def __init__(self, bank: FilterBank):
        axes = tuple(range(-bank.grid.dim, 0))
        shift = lambda a: np.fft.ifftshift(a, axes=axes).ravel()
        self.chi_power = shift(bank.chi.power)
        self.band = np.stack([shift(g.spectral_samples) for g in bank.band_filters]) \
            if bank.band_filters else np.zeros((0, bank.grid.size))
        self.band_power = self.band.real**2 + self.band.imag**2
        self.labels = bank.labels


class _Recorder:
    def __init__(self, depth: int, path_cap: int):
        self.node_e = [[] for _ in range(depth + 1)]
        self.feat_e = [[] for _ in range(depth)]
        self.pruned_e = [[] for _ in range(depth + 1)]
        self.path_cap = path_cap
        self.paths: list | None = []

    def add_path(self, rec):
        if self.paths is None:
            return
        if len(self.paths) >= self.path_cap:
            self.paths = None
        else:
            self.paths.append(rec)


class _Traversal:
    def __init__(self, omega: ModuleSequence, N: int, prune_tol: float, input_energy: float,
                 path_cap: int):
        self.grid = omega.grid
        self.N = N
        self.layers = [None] + [_Layer(omega.bank(n)) for n in range(1, N + 1)]
        self.threshold = prune_tol * input_energy
        self.path_cap = path_cap
        self.axes = tuple(range(1, self.grid.dim + 1))

    def _modulus_batch(self, spectra: np.ndarray) -> np.ndarray:
        shaped = spectra.reshape((-1,) + self.grid.shape)
        x = np.fft.ifftn(shaped, axes=self.axes, norm="ortho")
        y = np.fft.fftn(np.abs(x), axes=self.axes, norm="ortho")
        return y.reshape(spectra.shape[0], -1)

    def labels_of(self, positions) -> tuple:
        return tuple(self.layers[k + 1].labels[p] for k, p in enumerate(positions))

    def expand(self, spectra: np.ndarray, paths: np.ndarray, n: int, rec: _Recorder):
        """Expand a block of layer-``n`` maps (rows of ``spectra``) into layer ``n+1``."""
        layer = self.layers[n + 1]
        power = spectra.real**2 + spectra.imag**2
        feat = power @ layer.chi_power
        rec.feat_e[n].append(feat)
        child_e = power @ layer.band_power.T  # (m, L)
        L = child_e.shape[1]
        rec.node_e[n + 1].append(child_e.ravel())
        map_e = power.sum(axis=1)
        for i in range(spectra.shape[0]):
            rec.add_path(PathRecord(Path(self.labels_of(paths[i])), float(map_e[i]), float(feat[i])))
        if L == 0:
            return
        last = n + 1 == self.N
        keep = np.ones(child_e.shape, bool) if last else child_e >= self.threshold
        if not last:
            rec.pruned_e[n + 1].append(child_e[~keep])
        if rec.paths is not None:
            for i, lam in zip(*np.nonzero(~keep if not last else keep)):
                rec.add_path(PathRecord(Path(self.labels_of((*paths[i], lam))),
                                        float(child_e[i, lam]), None, pruned=not last))
        if last:
            return
        parent, lam = np.nonzero(keep)
        for start in range(0, parent.size, BLOCK_ROWS):
            p = parent[start:start + BLOCK_ROWS]
            q = lam[start:start + BLOCK_ROWS]
            child = self._modulus_batch(spectra[p] * layer.band[q])
            child_paths = np.concatenate([paths[p], q[:, None]], axis=1)
            self.expand(child, child_paths, n + 1, rec)


def run_scattering(omega: ModuleSequence, f: Signal, N: int,
                   prune_tol: float = DEFAULT_PRUNE_TOL, workers: int = 1,
                   path_cap: int = DEFAULT_PATH_CAP) -> ScatteringResult:
    """Propagate ``f`` through ``N`` layers of ``omega``.

    A map whose energy is below ``prune_tol * ||f||^2`` is neither expanded nor
    feature-extracted; its energy stays in ``W`` and is ledgered in
    ``pruned_energy`` at its layer.  Maps at depth ``N`` are never pruned.

    Level-1 subtrees are independent tasks; with ``workers > 1`` they run on a
    thread pool.  Every block has a fixed size and energies are summed with
    :func:`math.fsum` in path order, so the output does not depend on
    ``workers``.
    """
    if N < 1:
        raise DomainError(f"depth must be >= 1, got {N}")
    if prune_tol < 0:
        raise DomainError(f"prune_tol must be >= 0, got {prune_tol}")
    if N > omega.max_depth:
        raise DomainError(f"depth {N} exceeds the {omega.max_depth} available layers")
    if f.grid != omega.grid:
        raise DimensionError("signal and module sequence live on different grids")

    E0 = f.energy()
    trav = _Traversal(omega, N, prune_tol, E0, path_cap)
    axes = tuple(range(-f.grid.dim, 0))
    root = np.fft.ifftshift(f.spectral, axes=axes).reshape(1, -1)

    # root: layer 0 features and layer 1 energies
    head = _Recorder(N, path_cap)
    head.node_e[0].append(np.array([E0]))
    layer1 = trav.layers[1]
    p0 = root.real**2 + root.imag**2
    feat0 = p0 @ layer1.chi_power
    head.feat_e[0].append(feat0)
    e1 = (p0 @ layer1.band_power.T).ravel()
    head.node_e[1].append(e1)
    head.add_path(PathRecord(Path(), E0, float(feat0[0])))

    tasks = []
    if N == 1:
        for lam in range(e1.size):
            head.add_path(PathRecord(Path(trav.labels_of((lam,))), float(e1[lam]), None))
    else:
        pruned1 = e1 < trav.threshold
        head.pruned_e[1].append(e1[pruned1])
        for lam in np.nonzero(pruned1)[0]:
            head.add_path(PathRecord(Path(trav.labels_of((lam,))), float(e1[lam]), None, True))
        tasks = [int(lam) for lam in np.nonzero(~pruned1)[0]]

    def subtree(lam: int) -> _Recorder:
        rec = _Recorder(N, path_cap)
        child = trav._modulus_batch(root * layer1.band[lam])
        trav.expand(child, np.array([[lam]]), 1, rec)
        return rec

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            recs = list(ex.map(subtree, tasks))
    else:
        recs = [subtree(t) for t in tasks]

    def total(lists_per_rec, n):
        vals = [a for r in lists_per_rec for a in r[n]]
        return math.fsum(np.concatenate(vals)) if vals else 0.0

    node_lists = [head.node_e] + [r.node_e for r in recs]
    feat_lists = [head.feat_e] + [r.feat_e for r in recs]
    pruned_lists = [head.pruned_e] + [r.pruned_e for r in recs]
    W = np.array([total(node_lists, n) for n in range(N + 1)])
    W[0] = E0
    F = np.array([total(feat_lists, n) for n in range(N)])
    P = np.array([total(pruned_lists, n) for n in range(N + 1)])
    counts = np.array([sum(a.size for r in node_lists for a in r[n]) for n in range(N + 1)])

    per_path = None
    if all(r.paths is not None for r in [head, *recs]):
        merged = [p for r in [head, *recs] for p in r.paths]
        if len(merged) <= path_cap:
            per_path = sorted(merged, key=lambda r: _path_key(r.path, omega))

    config = {"depth": N, "prune_tol": prune_tol, "path_cap": path_cap,
              "banks": [omega.bank(n).name for n in range(1, N + 1)]}
    return ScatteringResult(N, W, F, P, E0, counts, per_path, config)


def _path_key(path: Path, omega: ModuleSequence):
    pos = tuple(omega.bank(k + 1).labels.index(lab) for k, lab in enumerate(path.indices))
    return (len(pos), pos)


# --- reports --------------------------------------------------------------------

@dataclass
class DecompositionRow:
    N: int
    lower: float
    middle: float
    upper: float
    slack: float
    passed: bool


def energy_decomposition_report(result: ScatteringResult, omega: ModuleSequence,
                                rtol: float = 1e-6) -> list[DecompositionRow]:
    """Check ``A^N ||f||^2 <= sum_{n<N} F[n] + W[N] <= B^N ||f||^2`` for ``N = 1..depth``.

    With pruning, the middle term can undershoot its exact value by at most
    ``B^N`` times the energy pruned upstream; that amount is reported as slack.
    """
    E = result.input_energy
    a_prod, b_prod = omega.products(result.depth)
    rows = []
    for N in range(1, result.depth + 1):
        middle = math.fsum(result.F[:N]) + result.W[N]
        slack = b_prod[N] * math.fsum(result.pruned_energy[:N])
        lower, upper = a_prod[N] * E, b_prod[N] * E
        tol = rtol * E
        ok = (lower - tol - slack <= middle) and (middle <= upper + tol)
        rows.append(DecompositionRow(N, lower, middle, upper, slack, ok))
    return rows


@dataclass
class DemodReport:
    energy: float
    low_band_fraction_before: float
    low_band_fraction_after: float
    passed: bool


def _low_fraction(spectrum: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    p = spectrum.real**2 + spectrum.imag**2
    tot = float(p.sum())
    return tot, (float(p[mask].sum()) / tot if tot > 0 else 0.0)


def demodulation_metrics(f: Signal, g: Filter, delta: float, gap_tol: float = GAP_TOL) -> DemodReport:
    """Low-band (``|w| < delta``) energy fractions of ``f*g`` and of ``|f*g|``."""
    h = extract_feature(f, g)
    mask = f.grid.radius < delta
    energy, before = _low_fraction(h.spectral, mask)
    _, after = _low_fraction(modulus(h).spectral, mask)
    passed = before <= gap_tol and after >= before
    return DemodReport(energy, before, after, passed)
