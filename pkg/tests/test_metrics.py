"""Tests for the five panel-configuration metrics."""

import math

import numpy as np
import pytest

from hmdchan.eigengain import EigenGainGrid, compute_grid, grid_mean_over_subcarriers
from hmdchan.geometry import DESK_LAYOUT, PanelConfig
from hmdchan.metrics import (
    capacity_tradeoff,
    gain_tradeoff,
    minimal_service_tradeoff,
    rear_headband_profit,
    volatility,
)

U, S, I, K = 2, 2, 5, 16
AXES = dict(positions=(0, 1), scenarios=("LOS", "NLOS"),
            snapshot_indices=(0, 1, 2, 3, 4))


def random_grid(rng, config, low=0.1, high=2.0, shape=(U, S, I, K)):
    vals = rng.uniform(low, high, size=shape)
    return EigenGainGrid(values=vals, config=config, **AXES)


def nested_pair(rng):
    """grid_p cellwise below grid_8, as row-subset interlacing guarantees."""
    g8 = random_grid(rng, PanelConfig.forward(8), low=0.5, high=2.0)
    frac = rng.uniform(0.05, 1.0, size=g8.values.shape)
    gp = EigenGainGrid(values=g8.values * frac,
                       config=PanelConfig.forward(4), **AXES)
    return gp, g8


class TestGainTradeoff:
    def test_identity(self):
        rng = np.random.default_rng(0)
        g8 = random_grid(rng, PanelConfig.forward(8))
        out = gain_tradeoff(g8, g8)
        assert out.values == pytest.approx(np.ones((U, S, I)))
        assert out.reference_label == g8.config.label

    def test_matches_direct_oracle_and_interlacing_bound(self):
        rng = np.random.default_rng(1)
        gp, g8 = nested_pair(rng)
        out = gain_tradeoff(gp, g8)
        for u in range(U):
            for s in range(S):
                for i in range(I):
                    acc = 0.0
                    for k in range(K):
                        acc += gp.values[u, s, i, k] / g8.values[u, s, i, k]
                    assert out.values[u, s, i] == pytest.approx(acc / K, rel=1e-12)
        assert np.all(out.values > 0.0)
        assert np.all(out.values <= 1.0 + 1e-12)

    def test_zero_reference_cell_lists_offenders(self):
        rng = np.random.default_rng(2)
        gp, g8 = nested_pair(rng)
        g8.values[1, 0, 3, 7] = 0.0
        with pytest.raises(ValueError, match=r"\(1, 'LOS', 3, 7\)"):
            gain_tradeoff(gp, g8)

    def test_axes_mismatch(self):
        rng = np.random.default_rng(3)
        gp, g8 = nested_pair(rng)
        other = EigenGainGrid(values=g8.values[:1], config=g8.config,
                              positions=(0,), scenarios=("LOS", "NLOS"),
                              snapshot_indices=(0, 1, 2, 3, 4))
        with pytest.raises(ValueError, match="share"):
            gain_tradeoff(gp, other)


class TestVolatility:
    def test_constant_series_undefined_marker(self):
        grid = EigenGainGrid(values=np.full((U, S, I, K), 3.7),
                             config=PanelConfig.forward(8), **AXES)
        out = volatility(grid)
        assert out.delta == pytest.approx(np.zeros((U, S)), abs=1e-12)
        assert not out.autocorr_defined.any()
        assert out.mean_gain == pytest.approx(np.full((U, S), 3.7))

    def test_ramp_series_matches_two_pass_oracle(self):
        series = np.arange(1.0, 34.0)  # 1..33
        vals = np.broadcast_to(series[None, None, :, None], (1, 1, 33, 4)).copy()
        grid = EigenGainGrid(values=vals, config=PanelConfig.forward(8),
                             positions=(0,), scenarios=("LOS",),
                             snapshot_indices=tuple(range(33)))
        out = volatility(grid)

        mean = sum(series) / 33
        sq = sum((x - mean) ** 2 for x in series)
        lag = sum((series[i] - mean) * (series[i + 1] - mean) for i in range(32))
        assert out.delta[0, 0] == pytest.approx(math.sqrt(sq / 33), rel=1e-12)
        assert out.autocorr_defined[0, 0]
        assert out.autocorr[0, 0] == pytest.approx(lag / sq, rel=1e-12)

    def test_iid_series_bounded_and_nearly_unbiased(self):
        # |r| <= 1 follows from Cauchy-Schwarz; the estimator's small-sample
        # mean for white series is about -1/I, so test against that center.
        rng = np.random.default_rng(99)
        n_series, n_i = 10_000, 33
        vals = rng.random((n_series, 1, n_i, 1)) + 0.5
        grid = EigenGainGrid(values=vals, config=PanelConfig.forward(8),
                             positions=tuple(range(n_series)),
                             scenarios=("LOS",),
                             snapshot_indices=tuple(range(n_i)))
        out = volatility(grid)
        assert out.autocorr_defined.all()
        assert np.all(np.abs(out.autocorr) <= 1.0)
        se = out.autocorr.std() / math.sqrt(n_series)
        assert abs(out.autocorr.mean() + 1.0 / n_i) <= 5 * se

    def test_single_snapshot_rejected(self):
        grid = EigenGainGrid(values=np.ones((1, 1, 1, 4)),
                             config=PanelConfig.forward(8))
        with pytest.raises(ValueError, match="two snapshots"):
            volatility(grid)


class TestMinimalService:
    def test_identical_vectors(self):
        v = np.linspace(0.2, 3.0, 50)
        out = minimal_service_tradeoff(v, v)
        assert out.delta_c == 0.0

    def test_quarter_scaling_gives_two_bits(self):
        rng = np.random.default_rng(4)
        v8 = rng.uniform(0.5, 4.0, size=200)
        out = minimal_service_tradeoff(v8 / 4.0, v8)
        assert out.delta_c == pytest.approx(2.0, rel=1e-12)

    def test_matches_sort_based_oracle(self):
        rng = np.random.default_rng(5)
        vp = rng.uniform(0.01, 1.0, size=333)
        v8 = rng.uniform(0.5, 2.0, size=333)
        out = minimal_service_tradeoff(vp, v8)
        rank = math.ceil(3 * 333 / 100)
        p3p = np.sort(vp)[rank - 1]
        p38 = np.sort(v8)[rank - 1]
        assert out.percentile_config == pytest.approx(p3p, rel=1e-12)
        assert out.percentile_reference == pytest.approx(p38, rel=1e-12)
        assert out.delta_c == pytest.approx(abs(math.log2(p3p / p38)), rel=1e-12)

    def test_nonpositive_percentile_rejected(self):
        vp = np.zeros(100)
        v8 = np.ones(100)
        with pytest.raises(ValueError, match="positive"):
            minimal_service_tradeoff(vp, v8)


class TestCapacityTradeoff:
    def test_equal_grids(self):
        rng = np.random.default_rng(6)
        g8 = random_grid(rng, PanelConfig.forward(8))
        out = capacity_tradeoff(g8, g8)
        assert out.values == pytest.approx(np.zeros((U, S, I)), abs=1e-12)

    def test_half_gain_costs_one_bit(self):
        rng = np.random.default_rng(7)
        g8 = random_grid(rng, PanelConfig.forward(8))
        gp = EigenGainGrid(values=g8.values / 2.0,
                           config=PanelConfig.forward(4), **AXES)
        out = capacity_tradeoff(gp, g8)
        assert out.values == pytest.approx(np.ones((U, S, I)), rel=1e-12)

    def test_absolute_value_taken_after_averaging(self):
        # Log ratios +2 and -1 average to +0.5; per-subcarrier absolute
        # values would instead give 1.5.
        g8 = EigenGainGrid(values=np.ones((1, 1, 1, 2)),
                           config=PanelConfig.forward(8))
        gp = EigenGainGrid(values=np.array([[[[4.0, 0.5]]]]),
                           config=PanelConfig.forward(4))
        out = capacity_tradeoff(gp, g8)
        assert out.values[0, 0, 0] == pytest.approx(0.5, rel=1e-12)

    def test_matches_direct_oracle_and_nonnegative(self):
        rng = np.random.default_rng(8)
        gp, g8 = nested_pair(rng)
        out = capacity_tradeoff(gp, g8)
        for u in range(U):
            for s in range(S):
                for i in range(I):
                    acc = 0.0
                    for k in range(K):
                        acc += math.log2(gp.values[u, s, i, k]
                                         / g8.values[u, s, i, k])
                    assert out.values[u, s, i] == pytest.approx(abs(acc / K),
                                                                rel=1e-12)
        assert np.all(out.values >= 0.0)

    def test_zero_cell_rejected(self):
        rng = np.random.default_rng(9)
        gp, g8 = nested_pair(rng)
        gp.values[0, 1, 2, 3] = 0.0
        with pytest.raises(ValueError, match="degenerate configuration"):
            capacity_tradeoff(gp, g8)


class TestRearHeadband:
    def test_equal_grids_give_unity(self):
        rng = np.random.default_rng(10)
        vals = rng.uniform(0.5, 2.0, size=(U, S, I, K))
        back = EigenGainGrid(values=vals, config=PanelConfig.backward(3), **AXES)
        front = EigenGainGrid(values=vals, config=PanelConfig.forward(3), **AXES)
        out = rear_headband_profit(back, front)
        assert out.values == pytest.approx(np.ones((U, S, I)))

    def test_matches_per_cell_oracle(self):
        rng = np.random.default_rng(11)
        back = random_grid(rng, PanelConfig.backward(1), low=0.5, high=3.0)
        front = random_grid(rng, PanelConfig.forward(1), low=0.2, high=1.0)
        out = rear_headband_profit(back, front)
        expect = np.mean(back.values / front.values, axis=3)
        assert out.values == pytest.approx(expect, rel=1e-12)

    def test_panel_count_mismatch_rejected(self):
        rng = np.random.default_rng(12)
        back = random_grid(rng, PanelConfig.backward(2))
        front = random_grid(rng, PanelConfig.forward(3))
        with pytest.raises(ValueError, match="panel counts differ"):
            rear_headband_profit(back, front)

    def test_non_mirror_configs_rejected(self):
        rng = np.random.default_rng(13)
        back = random_grid(rng, PanelConfig(panels=(0,), facing="backward"))
        front = random_grid(rng, PanelConfig.forward(1))
        with pytest.raises(ValueError, match="mirror"):
            rear_headband_profit(back, front)

    def test_rear_heavy_scene_profits_above_unity(self):
        # Nearly all arriving power comes from behind the head; the
        # backward-facing single panel sees it at boresight while the
        # forward panel only catches a weak frontal path.
        from hmdchan.denoise import DenoiseParams
        from hmdchan.geometry import MobilityPattern, ue_pose_at
        from hmdchan.synth import ApArray, Mpc, Scene, synthesize_snapshot
        from hmdchan.tensors import MeasurementKey

        ap = ApArray(n_rows=2, n_cols=2, boresight_azimuth_deg=180.0)
        scene = Scene(
            ap_position=(5.5, 4.5, 1.5),
            ue_base_position=(2.0, 4.5, 1.5),
            mpcs=(
                Mpc(complex_gain=1.0, excess_delay=10e-9, aoa=(180.0, 0.0),
                    aod=(170.0, 0.0), order=1),
                Mpc(complex_gain=0.05, excess_delay=20e-9, aoa=(5.0, 0.0),
                    aod=(185.0, 0.0), order=1),
            ),
            ap_array=ap,
        )
        pose = ue_pose_at(0.0, MobilityPattern(), scene.ue_base_position)
        snaps = []
        for i in range(2):
            snap = synthesize_snapshot(scene, pose, layout=DESK_LAYOUT,
                                       n_tap=256, key=MeasurementKey(i=i))
            snaps.append(snap)
        params = DenoiseParams.for_grid(256)
        back = compute_grid(snaps, PanelConfig.backward(1), params,
                            layout=DESK_LAYOUT)
        front = compute_grid(snaps, PanelConfig.forward(1), params,
                             layout=DESK_LAYOUT)
        out = rear_headband_profit(back, front)
        assert np.all(out.values > 1.0)


class TestCommonScaleInvariance:
    def test_ratio_metrics_ignore_common_per_cell_field(self):
        rng = np.random.default_rng(14)
        gp, g8 = nested_pair(rng)
        field = rng.uniform(0.5, 5.0, size=gp.values.shape)
        gp2 = EigenGainGrid(values=gp.values * field, config=gp.config, **AXES)
        g82 = EigenGainGrid(values=g8.values * field, config=g8.config, **AXES)

        a1 = gain_tradeoff(gp, g8).values
        b1 = gain_tradeoff(gp2, g82).values
        assert b1 == pytest.approx(a1, rel=1e-12)

        a4 = capacity_tradeoff(gp, g8).values
        b4 = capacity_tradeoff(gp2, g82).values
        assert b4 == pytest.approx(a4, rel=1e-12, abs=1e-12)

        back = EigenGainGrid(values=gp.values, config=PanelConfig.backward(4),
                             **AXES)
        front = EigenGainGrid(values=g8.values[..., :K],
                              config=PanelConfig.forward(4), **AXES)
        back2 = EigenGainGrid(values=back.values * field,
                              config=PanelConfig.backward(4), **AXES)
        front2 = EigenGainGrid(values=front.values * field,
                               config=PanelConfig.forward(4), **AXES)
        a5 = rear_headband_profit(back, front).values
        b5 = rear_headband_profit(back2, front2).values
        assert b5 == pytest.approx(a5, rel=1e-12)

    def test_minimal_service_ignores_common_scalar(self):
        rng = np.random.default_rng(15)
        vp = rng.uniform(0.1, 1.0, size=100)
        v8 = rng.uniform(0.5, 2.0, size=100)
        a = minimal_service_tradeoff(vp, v8).delta_c
        b = minimal_service_tradeoff(7.5 * vp, 7.5 * v8).delta_c
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


class TestNestedMonotonicity:
    def test_gain_tradeoff_monotone_over_nested_chain(self):
        # Computed end-to-end from one noisy snapshot: nested row subsets
        # give nested gains, so Eq. 1 values must be ordered too.
        from hmdchan.denoise import DenoiseParams
        from hmdchan.tensors import CirSnapshot, MeasurementKey

        rng = np.random.default_rng(16)
        t = rng.standard_normal((64, 8, 256)) + 1j * rng.standard_normal((64, 8, 256))
        t *= 0.05
        t[:, :, 3] += rng.standard_normal((64, 8)) + 1j * rng.standard_normal((64, 8))
        snap = CirSnapshot(tensor=t, tap_spacing=1.3e-9,
                           key=MeasurementKey())
        params = DenoiseParams.for_grid(256)
        chain = [
            PanelConfig(panels=(6,), facing="forward"),
            PanelConfig(panels=(2, 6), facing="forward"),
            PanelConfig(panels=(0, 2, 4, 6), facing="forward"),
            PanelConfig.forward(8),
        ]
        grids = [compute_grid([snap], c, params, layout=DESK_LAYOUT)
                 for c in chain]
        tradeoffs = [gain_tradeoff(g, grids[-1]).values for g in grids]
        for a, b in zip(tradeoffs, tradeoffs[1:]):
            assert np.all(a <= b + 1e-12)
        assert np.all(tradeoffs[0] > 0.0)
        assert tradeoffs[-1] == pytest.approx(1.0)
