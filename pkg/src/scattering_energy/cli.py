"""Command-line experiments.

Exit codes: 0 every checked claim holds, 1 a claim check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import bounds as bt
from . import filter_banks as fb
from .columnar import FormatError, read_bank, read_signal
from .config import ConfigError, ExperimentConfig
from .scattering import (demodulation_metrics, energy_decomposition_report, extract_feature,
                         run_scattering)
from .signals import (gen_bandlimited, gen_cartoon2d, gen_counterexample_signal, gen_sobolev,
                      in_band_report)
from .spectral_core import (ConfigurationError, DimensionError, DomainError, FrequencyGrid, Signal,
                            modulus)

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2
RTOL = 1e-6


class UsageError(Exception):
    pass


# --- builders -----------------------------------------------------------------

def make_grid(cfg: ExperimentConfig) -> FrequencyGrid:
    return FrequencyGrid(cfg.dim, cfg.grid_n, cfg.grid_omega_max)


def make_bank(cfg: ExperimentConfig, grid: FrequencyGrid) -> fb.FilterBank:
    kind = cfg.bank
    if kind == "file":
        if not cfg.bank_file:
            raise UsageError("--bank file needs --bank-file")
        # a bank file carries its own grid
        return read_bank(cfg.bank_file)
    if kind == "meyer":
        if grid.dim == 1:
            return fb.build_meyer_wavelet_bank(grid, cfg.j_max)
        return fb.build_meyer_2d_bank(grid, cfg.j_max, cfg.theta0)
    if kind == "wh":
        return fb.build_weyl_heisenberg_bank(grid, cfg.R, cfg.k_max)
    if kind == "counterexample":
        return fb.build_counterexample_bank(grid, cfg.l)
    raise UsageError(f"unknown bank {kind!r}")


def make_signal(cfg: ExperimentConfig, grid: FrequencyGrid):
    kind = cfg.signal
    if kind == "bandlimited":
        return gen_bandlimited(grid, cfg.L, cfg.seed)
    if kind == "sobolev":
        return gen_sobolev(grid, cfg.s, cfg.seed)
    if kind == "cartoon":
        return gen_cartoon2d(grid, None, cfg.seed)
    if kind == "counterexample":
        return gen_counterexample_signal(grid, cfg.l)
    if kind == "file":
        if not cfg.signal_file:
            raise UsageError("--signal file needs --signal-file")
        return read_signal(cfg.signal_file)
    if kind == "zero":
        return Signal.zeros(grid)
    raise UsageError(f"unknown signal {kind!r}")


def bound_params_for(bank: fb.FilterBank, cfg: ExperimentConfig, B_products) -> bt.BoundParams | None:
    """Bound family matching the bank; None when the bank violates the analyticity assumption."""
    if bank.name == "meyer" and bank.grid.dim == 1:
        return bt.BoundParams(bt.WAVELET, d=1, l=cfg.l, delta=1.0)
    if bank.name == "wh":
        return bt.BoundParams(bt.WEYL_HEISENBERG, d=1, l=cfg.l, delta=bank.params["R"],
                              R=bank.params["R"])
    report = fb.check_admissibility(bank)
    if not report.passed or not math.isfinite(report.delta):
        return None
    return bt.BoundParams(bt.GENERAL, d=bank.grid.dim, l=cfg.l, delta=report.delta,
                          B_products=B_products)


# --- output helpers --------------------------------------------------------------

class Output:
    def __init__(self, cfg: ExperimentConfig, command: str):
        self.dir = Path(cfg.out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.header = json.dumps({"command": command, "config": cfg.echo()}, sort_keys=True)
        self.fmt = cfg.format
        self.written: list[Path] = []

    def table(self, stem: str, columns: list[str], rows: list[list]):
        if self.fmt == "json":
            path = self.dir / f"{stem}.json"
            doc = {"header": json.loads(self.header), "columns": columns, "rows": rows}
            path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
        else:
            path = self.dir / f"{stem}.csv"
            with open(path, "w", newline="") as fh:
                fh.write("# " + self.header + "\n")
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                for r in rows:
                    w.writerow([_cell(v) for v in r])
        self.written.append(path)
        return path

    def summary(self, stem: str, doc: dict):
        path = self.dir / f"{stem}.json"
        full = {"header": json.loads(self.header), **doc}
        path.write_text(json.dumps(full, indent=2, sort_keys=True, default=_jsonable) + "\n")
        self.written.append(path)
        return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _omega_columns(grid: FrequencyGrid) -> tuple[list[str], list[np.ndarray]]:
    names = ["omega"] if grid.dim == 1 else [f"omega_{k + 1}" for k in range(grid.dim)]
    return names, [w.ravel() for w in grid.frequencies]


def _safe_float(x):
    return None if x is None or not math.isfinite(x) else float(x)


# --- commands ----------------------------------------------------------------------

def cmd_frame_check(cfg: ExperimentConfig) -> int:
    grid = make_grid(cfg)
    bank = make_bank(cfg, grid)
    grid = bank.grid
    A, B = fb.frame_bounds(bank)
    report = fb.check_admissibility(bank)
    out = Output(cfg, "frame-check")
    names, omegas = _omega_columns(grid)
    prof = bank.lp_profile.ravel()
    out.table("lp_profile", names + ["lp_profile"],
              [[*(float(w[i]) for w in omegas), float(prof[i])] for i in range(prof.size)])
    verdicts = [{"index": v.index, "verdict": v.verdict,
                 "orthant": None if v.orthant is None else v.orthant.tolist(), "reason": v.reason}
                for v in report.filters]
    out.summary("frame_check", {"A": A, "B": B, "delta": _safe_float(report.delta),
                                "admissible": report.passed, "filters": verdicts,
                                "reasons": report.reasons})
    print(f"bank={bank.name} filters={len(bank)} A={A!r} B={B!r} delta={report.delta!r}")
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CLAIM


def cmd_scatter(cfg: ExperimentConfig) -> int:
    grid = make_grid(cfg)
    bank = make_bank(cfg, grid)
    grid = bank.grid
    f = make_signal(cfg, grid)
    if f.grid != grid:
        raise UsageError("signal file grid does not match the bank grid")
    trust = in_band_report(f)
    if not trust["accepted"]:
        raise UsageError(f"signal rejected: {trust['top_octave_fraction']:.3g} of its energy lies "
                         "in the top octave of the grid (limit 1e-6)")
    omega = fb.ModuleSequence.repeat(bank)
    res = run_scattering(omega, f, cfg.depth, cfg.prune_tol, workers=cfg.workers)
    _, b_prod = omega.products(cfg.depth)
    params = bound_params_for(bank, cfg, b_prod)
    rows = []
    ok = True
    for n in range(cfg.depth + 1):
        bnd = ratio = None
        if params is not None and n >= 1:
            bnd = bt.bound(f, n, params)
            measured = res.W[n] + res.cumulative_pruned(n)
            ratio = measured / bnd if bnd > 0 else (0.0 if measured == 0 else math.inf)
            ok &= ratio <= 1 + RTOL
        rows.append([n, float(res.W[n]), float(res.F[n]) if n < cfg.depth else None,
                     float(res.pruned_energy[n]), bnd, ratio])
    out = Output(cfg, "scatter")
    out.table("scatter", ["layer", "W", "F", "pruned", "bound", "ratio"], rows)
    decomp = energy_decomposition_report(res, omega)
    ok &= all(r.passed for r in decomp)
    residual = res.conservation_residual()
    out.summary("scatter_summary", {
        "input_energy": res.input_energy,
        "bound_family": None if params is None else params.family,
        "conservation_residual": residual,
        "decomposition": [vars(r) for r in decomp],
        "node_counts": res.node_counts.tolist(),
        "trust": trust,
        "passed": bool(ok),
    })
    print(f"conservation: |sum F + W_N + pruned - |f|^2| / |f|^2 = {residual:.3e} "
          f"(depth {cfg.depth}, prune_tol {cfg.prune_tol:g})")
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_layers_table(cfg: ExperimentConfig) -> int:
    caps = cfg.capture_list()
    if any(not 0 < c < 1 for c in caps):
        raise UsageError("captured fractions must lie in (0, 1)")
    table = bt.layers_table(cfg.L, cfg.delta, cfg.l, cfg.dim, caps)
    default = (cfg.L == 1.0 and cfg.delta == 1.0 and cfg.l == 1.0001 and cfg.dim == 1
               and tuple(caps) == bt.TABLE_EPS_COMPLEMENTS)
    out = Output(cfg, "layers-table")
    labels = {bt.WAVELET: "wavelets", bt.WEYL_HEISENBERG: "weyl-heisenberg", bt.GENERAL: "general"}
    out.table("layers_table", ["family"] + [f"{c:g}" for c in caps],
              [[labels[k]] + v for k, v in table.items()])
    width = max(len(s) for s in labels.values())
    print(" " * width + " | " + " ".join(f"{c:>5g}" for c in caps))
    for k, v in table.items():
        print(f"{labels[k]:<{width}} | " + " ".join(f"{x:>5d}" for x in v))
    if not default:
        return EXIT_OK
    match = all(tuple(table[k]) == bt.TABLE_EXPECTED[k] for k in table)
    print("matches the reference table" if match else "MISMATCH with the reference table")
    return EXIT_OK if match else EXIT_CLAIM


def cmd_counterexample(cfg: ExperimentConfig) -> int:
    grid = make_grid(cfg)
    bank = fb.build_counterexample_bank(grid, cfg.l)
    f = gen_counterexample_signal(grid, cfg.l)
    E = f.energy()
    depth = 4
    omega = fb.ModuleSequence.repeat(bank)
    res = run_scattering(omega, f, depth, prune_tol=0.0, workers=cfg.workers)
    frac = res.captured() / E
    g0 = [r for r in res.per_path if r.path.indices and all(i == 0 for i in r.path.indices)]
    g0_dev = [abs(r.map_energy - E) / E for r in g0]
    report = fb.check_admissibility(bank)

    if grid.dim == 1:
        contrast_bank = fb.build_meyer_wavelet_bank(grid, cfg.j_max)
        contrast_depth = bt.layers_bandlimited(1.0, 0.05, 1.0001, 1.0, bt.WAVELET, 1)
    else:
        contrast_bank = fb.build_meyer_2d_bank(grid, cfg.j_max, cfg.theta0)
        contrast_depth = depth
    cres = run_scattering(fb.ModuleSequence.repeat(contrast_bank), f, contrast_depth,
                          cfg.prune_tol, workers=cfg.workers)
    cfrac = cres.captured() / E

    ok = frac <= 1e-8 and all(d <= 1e-9 for d in g0_dev) and len(g0) == depth \
        and not report.passed and cfrac > 0 and (grid.dim != 1 or cfrac >= 0.95)
    out = Output(cfg, "counterexample")
    out.table("counterexample_layers", ["layer", "W", "F", "g0_path_energy"],
              [[n, float(res.W[n]), float(res.F[n]) if n < depth else None,
                E if n == 0 else g0[n - 1].map_energy] for n in range(depth + 1)])
    out.summary("counterexample", {
        "input_energy": E,
        "feature_energy_fraction": frac,
        "g0_path_relative_deviation": g0_dev,
        "admissible": report.passed,
        "admissibility_reasons": report.reasons,
        "contrast_bank": contrast_bank.name,
        "contrast_depth": contrast_depth,
        "contrast_feature_energy_fraction": cfrac,
        "passed": bool(ok),
    })
    print(f"counterexample bank: feature energy fraction {frac:.3e} over depth {depth}")
    print(report.summary())
    print(f"{contrast_bank.name} bank, depth {contrast_depth}: feature energy fraction {cfrac:.6f}")
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_demod(cfg: ExperimentConfig) -> int:
    grid = make_grid(cfg)
    bank = make_bank(cfg, grid)
    grid = bank.grid
    report = fb.check_admissibility(bank)
    if not report.passed:
        raise UsageError("demod needs a bank that satisfies the analyticity assumption")
    f = make_signal(cfg, grid)
    delta = report.delta
    rows = []
    ok = True
    best = None
    for g in bank.band_filters:
        d = demodulation_metrics(f, g, delta)
        rows.append([str(g.index), d.energy, d.low_band_fraction_before, d.low_band_fraction_after])
        ok &= d.low_band_fraction_before <= fb.GAP_TOL
        if d.energy > 0:
            ok &= d.low_band_fraction_after > d.low_band_fraction_before
        if best is None or d.energy > best[1]:
            best = (g, d.energy)
    out = Output(cfg, "demod")
    out.table("demod", ["lambda", "energy", "low_band_before", "low_band_after"], rows)

    if cfg.lam is not None:
        match = [g for g in bank.band_filters if str(g.index) == cfg.lam]
        if not match:
            raise UsageError(f"no band filter labelled {cfg.lam!r}")
        chosen = match[0]
    else:
        chosen = best[0]
    filtered = extract_feature(f, chosen)
    h = filtered.spectral
    demod = modulus(filtered).spectral
    names, omegas = _omega_columns(grid)
    cols = [np.abs(h).ravel() ** 2, np.abs(demod).ravel() ** 2, bank.chi.power.ravel()]
    out.table("demod_spectra", names + ["filtered_power", "demodulated_power", "chi_power"],
              [[*(float(w[i]) for w in omegas), *(float(c[i]) for c in cols)]
               for i in range(grid.size)])
    out.summary("demod_summary", {"delta": delta, "lambda": str(chosen.index), "passed": bool(ok)})
    print(f"demodulation over {len(rows)} filters, delta = {delta:g}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_bounds_compare(cfg: ExperimentConfig) -> int:
    grid = make_grid(cfg)
    bank = make_bank(cfg, grid)
    grid = bank.grid
    f = make_signal(cfg, grid)
    omega = fb.ModuleSequence.repeat(bank)
    res = run_scattering(omega, f, cfg.depth, cfg.prune_tol, workers=cfg.workers)
    _, b_prod = omega.products(cfg.depth)
    own = bound_params_for(bank, cfg, b_prod)
    families = {}
    if grid.dim == 1:
        l_exp = max(cfg.l, 1.0001)
        families["wavelet"] = bt.BoundParams(bt.WAVELET, 1, l_exp)
        families["wh"] = bt.BoundParams(bt.WEYL_HEISENBERG, 1, l_exp, delta=cfg.R, R=cfg.R)
    delta = fb.check_admissibility(bank).delta
    if math.isfinite(delta) and delta > 0:
        families["general"] = bt.BoundParams(bt.GENERAL, grid.dim, cfg.l, delta, B_products=b_prod)
    rows = []
    ok = True
    curves = {k: [] for k in families}
    for N in range(1, cfg.depth + 1):
        vals = {k: bt.bound(f, N, p) for k, p in families.items()}
        for k, v in vals.items():
            curves[k].append(v)
        measured = res.W[N] + res.cumulative_pruned(N)
        own_bound = bt.bound(f, N, own) if own is not None else None
        if own_bound is not None:
            ok &= measured <= own_bound * (1 + RTOL)
        rows.append([N, float(res.W[N])] + [vals[k] for k in families] + [own_bound])
    out = Output(cfg, "bounds-compare")
    out.table("bounds_compare", ["N", "W"] + [f"bound_{k}" for k in families] + ["bound_own"], rows)
    decrements = {k: (bt.fitted_log_decrement(v) if len(v) > 1 and min(v) > 0 else None)
                  for k, v in curves.items()}
    out.summary("bounds_compare_summary", {"log_decrements": decrements,
                                           "own_family": None if own is None else own.family,
                                           "passed": bool(ok)})
    print("fitted log-decrements of the bound curves: " +
          ", ".join(f"{k}={'n/a' if v is None else f'{v:.4f}'}" for k, v in decrements.items()))
    return EXIT_OK if ok else EXIT_CLAIM


COMMANDS = {
    "frame-check": cmd_frame_check,
    "scatter": cmd_scatter,
    "layers-table": cmd_layers_table,
    "counterexample": cmd_counterexample,
    "demod": cmd_demod,
    "bounds-compare": cmd_bounds_compare,
}


# --- argument parsing -------------------------------------------------------------------

_FLAGS = {
    # flag: (config key, type, help)
    "--dim": ("dim", int, "signal dimension (1 or 2)"),
    "--grid-n": ("grid_n", int, "samples per axis (power of two)"),
    "--grid-omega-max": ("grid_omega_max", float, "half-width of the frequency band per axis"),
    "--bank": ("bank", str, "meyer | wh | counterexample | file"),
    "--bank-file": ("bank_file", str, "bank in columnar text format"),
    "--R": ("R", float, "Weyl-Heisenberg modulation step"),
    "--j-max": ("j_max", int, "number of wavelet scales"),
    "--k-max": ("k_max", int, "number of Weyl-Heisenberg modulations per side"),
    "--theta0": ("theta0", float, "rotation of the 2-D quadrant bank (radians)"),
    "--signal": ("signal", str, "bandlimited | sobolev | cartoon | counterexample | file | zero"),
    "--signal-file": ("signal_file", str, "signal in columnar text format"),
    "--L": ("L", float, "bandwidth"),
    "--s": ("s", float, "Sobolev order"),
    "--l": ("l", float, "exponent of the bump (1-|w|)_+^l"),
    "--delta": ("delta", float, "spectral-gap radius used by layers-table"),
    "--eps": ("eps", float, "energy fraction allowed to escape"),
    "--captures": ("captures", str, "comma-separated list of 1-eps values"),
    "--depth": ("depth", int, "network depth N"),
    "--prune-tol": ("prune_tol", float, "relative energy below which nodes are not expanded"),
    "--seed": ("seed", int, "random seed"),
    "--lam": ("lam", str, "band filter whose spectra demod dumps"),
    "--workers": ("workers", int, "threads for subtree propagation"),
    "--out-dir": ("out_dir", str, "directory for output files"),
    "--format": ("format", str, "csv | json"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    for flag, (key, typ, hlp) in _FLAGS.items():
        common.add_argument(flag, dest=key, type=typ, default=None, help=hlp)
    parser = argparse.ArgumentParser(prog="scattering-energy", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name.replace("-", " ")))
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config:
        try:
            values.update(ExperimentConfig.parse_pairs(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return ExperimentConfig(**values).resolved(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ConfigError, ConfigurationError, DomainError, DimensionError,
            FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
