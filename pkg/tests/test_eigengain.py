"""Tests for per-subcarrier dominant-eigenmode gain grids."""

import numpy as np
import pytest

from hmdchan.denoise import DenoiseParams
from hmdchan.eigengain import (
    EigenGainGrid,
    compute_grid,
    grid_mean_over_subcarriers,
    infer_layout,
    subcarrier_gain_slice,
)
from hmdchan.geometry import DESK_LAYOUT, ArrayLayout, PanelConfig
from hmdchan.tensors import CirSnapshot, MeasurementKey

TAP = 1.3e-9
TINY = ArrayLayout(elements_per_panel=1)  # 16 rows, quick sweeps
TINY_PARAMS = DenoiseParams(noise_region=(32 * TAP, 64 * TAP), tau_max=26e-9)
DESK_PARAMS = DenoiseParams.for_grid(256)


def make_cir(tensor, u=0, s="LOS", i=0):
    return CirSnapshot(tensor=np.asarray(tensor, dtype=np.complex128),
                       tap_spacing=TAP, key=MeasurementKey(u=u, s=s, i=i))


def flat_rank1_cir(n_rx, n_tx, n_tap, g, rng):
    """Single tap at delay zero, rank one, unit-modulus row/column factors.

    The dominant squared singular value is g**2 * n_rx * n_tx at every
    subcarrier, and any row subset contributes proportionally to its size.
    """
    u = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n_rx))
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n_tx))
    t = np.zeros((n_rx, n_tx, n_tap), dtype=np.complex128)
    t[:, :, 0] = g * np.outer(u, v.conj())
    return make_cir(t)


def noisy_cir(n_rx, n_tx, n_tap, rng, u=0, s="LOS", i=0):
    t = rng.standard_normal((n_rx, n_tx, n_tap)) * 0.05
    t = t + 1j * rng.standard_normal((n_rx, n_tx, n_tap)) * 0.05
    t[:, :, 4] += rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
    return make_cir(t, u=u, s=s, i=i)


class TestLayoutInference:
    def test_known_row_counts(self):
        assert infer_layout(256).n_rx == 256
        assert infer_layout(64) is DESK_LAYOUT or infer_layout(64).n_rx == 64

    def test_unknown_row_count_raises(self):
        with pytest.raises(ValueError, match="pass layout="):
            infer_layout(16)

    def test_explicit_layout_must_match_rows(self):
        cir = make_cir(np.zeros((16, 4, 64)))
        with pytest.raises(ValueError, match="rows"):
            subcarrier_gain_slice(cir, PanelConfig.forward(8), layout=DESK_LAYOUT)


class TestGainSlice:
    def test_zero_snapshot_gives_zero_slice(self):
        cir = make_cir(np.zeros((16, 4, 64)))
        lam = subcarrier_gain_slice(cir, PanelConfig.forward(8), layout=TINY)
        assert lam.shape == (64,)
        assert np.all(lam == 0.0)

    def test_flat_rank1_full_array_value(self):
        rng = np.random.default_rng(1)
        cir = flat_rank1_cir(64, 32, 256, g=0.7, rng=rng)
        lam = subcarrier_gain_slice(cir, PanelConfig.forward(8),
                                    layout=DESK_LAYOUT)
        expect = 0.7 ** 2 * 64 * 32
        assert lam == pytest.approx(np.full(256, expect), rel=1e-12)

    def test_flat_rank1_half_array_is_exactly_half(self):
        rng = np.random.default_rng(2)
        cir = flat_rank1_cir(64, 32, 256, g=1.0, rng=rng)
        lam8 = subcarrier_gain_slice(cir, PanelConfig.forward(8),
                                     layout=DESK_LAYOUT)
        lam4 = subcarrier_gain_slice(cir, PanelConfig.forward(4),
                                     layout=DESK_LAYOUT)
        assert lam4 == pytest.approx(0.5 * lam8, rel=1e-12)

    def test_subset_dominance(self):
        rng = np.random.default_rng(3)
        t = rng.standard_normal((16, 4, 64)) + 1j * rng.standard_normal((16, 4, 64))
        clean = make_cir(t)
        chain = [
            PanelConfig(panels=(6,), facing="forward"),
            PanelConfig(panels=(3, 6), facing="forward"),
            PanelConfig(panels=(1, 3, 6), facing="forward"),
            PanelConfig.forward(8),
        ]
        slices = [subcarrier_gain_slice(clean, c, layout=TINY) for c in chain]
        for a, b in zip(slices, slices[1:]):
            assert np.all(a <= b * (1 + 1e-9))

    def test_row_permutation_within_config_is_invariant(self):
        rng = np.random.default_rng(4)
        t = rng.standard_normal((16, 4, 64)) + 1j * rng.standard_normal((16, 4, 64))
        config = PanelConfig(panels=(1, 3, 6), facing="forward")
        from hmdchan.geometry import rows_for_config
        rows = rows_for_config(config, TINY)
        t2 = t.copy()
        t2[rows] = t[rng.permutation(rows)]
        a = subcarrier_gain_slice(make_cir(t), config, layout=TINY)
        b = subcarrier_gain_slice(make_cir(t2), config, layout=TINY)
        assert b == pytest.approx(a, rel=1e-12)

    def test_chunking_does_not_change_result(self):
        rng = np.random.default_rng(5)
        t = rng.standard_normal((16, 4, 64)) + 1j * rng.standard_normal((16, 4, 64))
        cir = make_cir(t)
        cfg = PanelConfig.forward(8)
        a = subcarrier_gain_slice(cir, cfg, layout=TINY, chunk=7)
        b = subcarrier_gain_slice(cir, cfg, layout=TINY, chunk=512)
        assert a == pytest.approx(b, rel=1e-12)


class TestComputeGrid:
    def test_full_lattice_assembly(self):
        rng = np.random.default_rng(6)
        snaps = [
            noisy_cir(16, 4, 64, rng, u=u, s=s, i=i)
            for u in (0, 1) for s in ("LOS", "NLOS") for i in (0, 1, 2)
        ]
        grid = compute_grid(snaps, PanelConfig.forward(8), TINY_PARAMS,
                            layout=TINY)
        assert grid.values.shape == (2, 2, 3, 64)
        assert grid.positions == (0, 1)
        assert grid.scenarios == ("LOS", "NLOS")
        assert grid.snapshot_indices == (0, 1, 2)
        assert np.all(grid.values >= 0.0)

    def test_grid_cells_match_single_snapshot_path(self):
        rng = np.random.default_rng(7)
        snap = noisy_cir(16, 4, 64, rng, u=3, s="NLOS", i=5)
        grid = compute_grid([snap], PanelConfig.forward(8), TINY_PARAMS,
                            layout=TINY)
        from hmdchan.denoise import denoise
        clean, _ = denoise(snap, TINY_PARAMS)
        direct = subcarrier_gain_slice(clean, PanelConfig.forward(8),
                                       layout=TINY)
        assert grid.values[0, 0, 0] == pytest.approx(direct, rel=1e-12)
        assert grid.positions == (3,)
        assert grid.scenarios == ("NLOS",)
        assert grid.snapshot_indices == (5,)

    def test_scaling_the_cir_scales_every_cell(self):
        rng = np.random.default_rng(8)
        snap = noisy_cir(16, 4, 64, rng)
        c = 0.5 - 1.25j
        scaled = make_cir(c * snap.tensor)
        cfg = PanelConfig.forward(4)
        g1 = compute_grid([snap], cfg, TINY_PARAMS, layout=TINY)
        g2 = compute_grid([scaled], cfg, TINY_PARAMS, layout=TINY)
        assert g2.values == pytest.approx(abs(c) ** 2 * g1.values, rel=1e-9)

    def test_missing_cell_raises(self):
        rng = np.random.default_rng(9)
        snaps = [noisy_cir(16, 4, 64, rng, u=u, i=i)
                 for u, i in [(0, 0), (0, 1), (1, 0)]]
        with pytest.raises(ValueError, match="incomplete grid"):
            compute_grid(snaps, PanelConfig.forward(8), TINY_PARAMS, layout=TINY)

    def test_duplicate_cell_raises(self):
        rng = np.random.default_rng(10)
        snaps = [noisy_cir(16, 4, 64, rng), noisy_cir(16, 4, 64, rng)]
        with pytest.raises(ValueError, match="duplicate"):
            compute_grid(snaps, PanelConfig.forward(8), TINY_PARAMS, layout=TINY)

    def test_dimension_mismatch_raises(self):
        rng = np.random.default_rng(11)
        snaps = [noisy_cir(16, 4, 64, rng, i=0), noisy_cir(16, 8, 64, rng, i=1)]
        with pytest.raises(ValueError, match="share dimensions"):
            compute_grid(snaps, PanelConfig.forward(8), TINY_PARAMS, layout=TINY)

    def test_empty_list_raises(self):
        with pytest.raises(ValueError, match="no snapshots"):
            compute_grid([], PanelConfig.forward(8), TINY_PARAMS, layout=TINY)


class TestGridType:
    def test_rejects_negative_values(self):
        with pytest.raises(ValueError, match="non-negative"):
            EigenGainGrid(values=-np.ones((1, 1, 1, 4)),
                          config=PanelConfig.forward(8))

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValueError, match="axes"):
            EigenGainGrid(values=np.ones((1, 1, 4)),
                          config=PanelConfig.forward(8))

    def test_rejects_label_shape_mismatch(self):
        with pytest.raises(ValueError, match="axis labels"):
            EigenGainGrid(values=np.ones((2, 1, 1, 4)),
                          config=PanelConfig.forward(8), positions=(0,))


class TestGridMean:
    def test_constant_grid(self):
        grid = EigenGainGrid(values=np.full((2, 1, 3, 8), 2.5),
                             config=PanelConfig.forward(8), positions=(0, 1))
        assert grid_mean_over_subcarriers(grid) == pytest.approx(
            np.full((2, 1, 3), 2.5))

    def test_arithmetic_series(self):
        K = 64
        vals = np.broadcast_to(np.arange(K) / K, (1, 1, 1, K)).copy()
        grid = EigenGainGrid(values=vals, config=PanelConfig.forward(8))
        out = grid_mean_over_subcarriers(grid)
        assert out[0, 0, 0] == pytest.approx((K - 1) / (2 * K), rel=1e-12)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(12)
        vals = rng.random((2, 2, 3, 16))
        grid = EigenGainGrid(values=vals, config=PanelConfig.forward(8),
                             positions=(0, 1), scenarios=("LOS", "NLOS"))
        out = grid_mean_over_subcarriers(grid)
        for u in range(2):
            for s in range(2):
                for i in range(3):
                    acc = 0.0
                    for k in range(16):
                        acc += vals[u, s, i, k]
                    assert out[u, s, i] == pytest.approx(acc / 16, rel=1e-12)
