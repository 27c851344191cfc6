import math

import numpy as np
from hypothesis import given, settings, strategies as st

from scattering_energy import filter_banks as fb
from scattering_energy.scattering import (Path, demodulation_metrics, energy_decomposition_report,
                                          propagate_node, run_scattering)
from scattering_energy.signals import gen_bandlimited, gen_counterexample_signal, gen_sobolev
from scattering_energy.spectral_core import FrequencyGrid, Signal

GRID = FrequencyGrid(1, 256, 16.0)
BANK = fb.build_meyer_wavelet_bank(GRID, 3)
OMEGA = fb.ModuleSequence.repeat(BANK)


def brute_tree(f, N):
    """Direct recursion over every path; returns (W[0..N], F[0..N-1])."""
    W = [0.0] * (N + 1)
    F = [0.0] * N
    layer = [f]
    for n in range(N + 1):
        W[n] = math.fsum(u.energy() for u in layer)
        if n == N:
            break
        F[n] = math.fsum(float(np.sum(np.abs(u.spectral * BANK.chi.spectral_samples) ** 2))
                         for u in layer)
        layer = [propagate_node(u, g) for u in layer for g in BANK.band_filters]
    return W, F


def test_engine_matches_direct_recursion():
    f = gen_bandlimited(GRID, 6.0, seed=3)
    res = run_scattering(OMEGA, f, 3, prune_tol=0.0)
    W, F = brute_tree(f, 3)
    np.testing.assert_allclose(res.W, W, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(res.F, F, rtol=1e-12, atol=1e-15)
    assert list(res.node_counts) == [1, 6, 36, 216]


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.floats(1.0, 7.5))
def test_conservation_identity(seed, L):
    f = gen_bandlimited(GRID, L, seed)
    res = run_scattering(OMEGA, f, 3, prune_tol=0.0)
    assert res.conservation_residual() <= 1e-12
    assert all(r.passed for r in energy_decomposition_report(res, OMEGA))
    # Parseval bank: layer energies are nonincreasing
    assert np.all(np.diff(res.W) <= 1e-15)


def test_pruning_keeps_identity_and_brackets_energy():
    f = gen_sobolev(GRID, 3.0, seed=1)
    exact = run_scattering(OMEGA, f, 4, prune_tol=0.0)
    pruned = run_scattering(OMEGA, f, 4, prune_tol=1e-4)
    assert pruned.conservation_residual() <= 1e-12
    assert pruned.node_counts.sum() < exact.node_counts.sum()
    for N in range(1, 5):
        assert pruned.W[N] <= exact.W[N] + 1e-15
        assert exact.W[N] <= pruned.W[N] + pruned.cumulative_pruned(N) + 1e-15


def test_determinism_across_workers():
    f = gen_bandlimited(GRID, 5.0, seed=9)
    a = run_scattering(OMEGA, f, 4, prune_tol=1e-8, workers=1)
    b = run_scattering(OMEGA, f, 4, prune_tol=1e-8, workers=4)
    assert a.to_json() == b.to_json()
    assert a.W.tobytes() == b.W.tobytes() and a.F.tobytes() == b.F.tobytes()


def test_per_path_records_and_cap():
    f = gen_bandlimited(GRID, 5.0, seed=2)
    res = run_scattering(OMEGA, f, 2, prune_tol=0.0)
    paths = [r.path for r in res.per_path]
    assert paths[0] == Path(())
    assert len(paths) == 1 + 6 + 36
    assert [p.indices for p in paths[1:7]] == [(1,), (-1,), (2,), (-2,), (3,), (-3,)]
    assert run_scattering(OMEGA, f, 2, prune_tol=0.0, path_cap=10).per_path is None


def test_zero_signal():
    res = run_scattering(OMEGA, Signal.zeros(GRID), 3)
    assert res.input_energy == 0 and np.all(res.W == 0)
    assert res.conservation_residual() == 0


def test_counterexample_energy_trapped():
    grid = FrequencyGrid(1, 256, 8.0)
    bank = fb.build_counterexample_bank(grid)
    f = gen_counterexample_signal(grid, 2.0)
    res = run_scattering(fb.ModuleSequence.repeat(bank), f, 4, prune_tol=0.0)
    assert res.captured() <= 1e-12 * f.energy()
    assert np.allclose(res.W, f.energy(), rtol=1e-12)


def test_demodulation_metrics():
    f = gen_bandlimited(GRID, 14.0, seed=0)
    delta = fb.check_admissibility(BANK).delta
    for g in BANK.band_filters:
        d = demodulation_metrics(f, g, delta)
        assert d.low_band_fraction_before <= 1e-9
        assert d.low_band_fraction_after > d.low_band_fraction_before
        assert d.passed


def test_result_serialization():
    f = gen_bandlimited(GRID, 4.0, seed=0)
    res = run_scattering(OMEGA, f, 2)
    csv_text = res.to_csv().splitlines()
    assert csv_text[0] == "layer,W,F,pruned" and len(csv_text) == 4
    assert '"per_path"' in res.to_json()
