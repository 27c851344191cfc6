"""Columnar text format for filter banks and signals.

One ``#``-prefixed JSON header line carries the grid metadata and column
layout; every following row is one lattice bin: its frequency components,
then a (real, imaginary) pair per column.  Values are written with 17
significant digits, so a write/read cycle is lossless.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .filter_banks import Filter, FilterBank
from .spectral_core import FrequencyGrid, Signal

FORMAT_NAME = "scattering-energy-columns"
FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def _write(path, grid: FrequencyGrid, header: dict, columns: list[np.ndarray]):
    header = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "grid": grid.to_dict(), **header}
    omegas = [w.ravel() for w in grid.frequencies]
    data = [*omegas]
    for col in columns:
        c = np.asarray(col, dtype=complex).ravel()
        data += [c.real, c.imag]
    table = np.column_stack(data)
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        np.savetxt(fh, table, fmt="%.17g")


def _read(path) -> tuple[dict, FrequencyGrid, list[np.ndarray]]:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise FormatError(f"{path}: missing header line")
        try:
            header = json.loads(first[1:])
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: unreadable header ({exc})") from None
        if header.get("format") != FORMAT_NAME:
            raise FormatError(f"{path}: not a {FORMAT_NAME} file")
        g = header["grid"]
        grid = FrequencyGrid(int(g["dim"]), int(g["samples_per_axis"]), float(g["omega_max"]))
        table = np.loadtxt(fh, ndmin=2)
    ncols = len(header["columns"])
    if table.shape != (grid.size, grid.dim + 2 * ncols):
        raise FormatError(f"{path}: table shape {table.shape} does not match header")
    for axis, w in enumerate(grid.frequencies):
        if not np.allclose(table[:, axis], w.ravel(), rtol=0, atol=1e-9 * grid.omega_max):
            raise FormatError(f"{path}: frequency column {axis} does not match the grid")
    cols = []
    for k in range(ncols):
        re = table[:, grid.dim + 2 * k]
        im = table[:, grid.dim + 2 * k + 1]
        cols.append((re + 1j * im).reshape(grid.shape))
    return header, grid, cols


def write_bank(path, bank: FilterBank):
    filters = [bank.chi, *bank.band_filters]
    header = {
        "kind": "bank",
        "name": bank.name,
        "columns": [f.index for f in filters],
        "roles": [f.role for f in filters],
        "orthant_tags": [None if f.orthant_tag is None else f.orthant_tag.tolist() for f in filters],
    }
    _write(path, bank.grid, header, [f.spectral_samples for f in filters])


def _maybe_real(a: np.ndarray) -> np.ndarray:
    return a.real.copy() if not np.any(a.imag) else a


def read_bank(path) -> FilterBank:
    header, grid, cols = _read(path)
    if header.get("kind") != "bank":
        raise FormatError(f"{path}: expected a bank file, found {header.get('kind')!r}")
    roles = header["roles"]
    if roles.count("output_generating") != 1:
        raise FormatError(f"{path}: exactly one output-generating filter required")
    tags = header.get("orthant_tags") or [None] * len(cols)
    chi = None
    bands = []
    for lab, role, tag, col in zip(header["columns"], roles, tags, cols):
        flt = Filter(_maybe_real(col), lab, role, tag)
        if role == "output_generating":
            chi = flt
        else:
            bands.append(flt)
    return FilterBank(grid, chi, tuple(bands), name=header.get("name", "file"))


def write_signal(path, signal: Signal):
    header = {"kind": "signal", "columns": ["spectrum"],
              "meta": {k: v for k, v in signal.meta.items() if isinstance(v, (int, float, str, bool))}}
    _write(path, signal.grid, header, [signal.spectral])


def read_signal(path) -> Signal:
    header, grid, cols = _read(path)
    if header.get("kind") != "signal":
        raise FormatError(f"{path}: expected a signal file, found {header.get('kind')!r}")
    meta = dict(header.get("meta", {}))
    meta.setdefault("kind", "file")
    return Signal.from_spectral(grid, cols[0], meta=meta)
