"""Five panel-configuration performance metrics over eigen-gain grids.

All metrics compare a reduced panel configuration against a reference
(usually the full 8-panel array) through per-subcarrier gain ratios, or
summarize the temporal behaviour of the subcarrier-averaged gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hmdchan.eigengain import EigenGainGrid, grid_mean_over_subcarriers
from hmdchan.tensors import percentile

RELIABILITY_PERCENTILE = 3.0  # worst 3% <=> 97% link reliability
_CONSTANT_SERIES_RTOL = 1e-12


def _check_same_axes(a: EigenGainGrid, b: EigenGainGrid) -> None:
    if (a.positions != b.positions or a.scenarios != b.scenarios
            or a.snapshot_indices != b.snapshot_indices
            or a.n_subcarriers != b.n_subcarriers):
        raise ValueError("grids do not share (position, scenario, snapshot, "
                         "subcarrier) axes")


def _cell_labels(grid: EigenGainGrid, flat_indices: np.ndarray, k: bool = True):
    cells = []
    for idx in flat_indices[:5]:
        u, s, i, kk = np.unravel_index(idx, grid.values.shape)
        cell = (grid.positions[u], grid.scenarios[s], grid.snapshot_indices[i])
        cells.append(cell + (int(kk),) if k else cell)
    return cells


def _require_positive(grid: EigenGainGrid, name: str) -> None:
    bad = np.flatnonzero(grid.values.ravel() <= 0.0)
    if bad.size:
        cells = _cell_labels(grid, bad)
        raise ValueError(
            f"degenerate {name} grid: non-positive gain at (u, s, i, k) cells "
            f"{cells}{' ...' if bad.size > 5 else ''}"
        )


@dataclass
class GainTradeoff:
    """Mean per-subcarrier gain ratio against the reference array, per
    (position, scenario, snapshot)."""

    values: np.ndarray
    positions: tuple[int, ...]
    scenarios: tuple[str, ...]
    snapshot_indices: tuple[int, ...]
    config_label: str
    reference_label: str


@dataclass
class VolatilityStats:
    """Temporal statistics of the subcarrier-averaged gain per (u, s).

    autocorr_defined marks cells where the lag-1 autocorrelation exists; a
    numerically constant series has no meaningful autocorrelation and its
    autocorr entry is a placeholder NaN, flagged False here.
    """

    delta: np.ndarray
    autocorr: np.ndarray
    autocorr_defined: np.ndarray
    mean_gain: np.ndarray
    positions: tuple[int, ...]
    scenarios: tuple[str, ...]
    config_label: str


@dataclass
class MinimalServiceTradeoff:
    """Capacity loss at the 97% reliability point, in bits/s/Hz."""

    delta_c: float
    percentile_config: float
    percentile_reference: float
    config_label: str
    reference_label: str


@dataclass
class CapacityTradeoff:
    """High-SNR mean capacity loss per (u, s, i), in bits/s/Hz."""

    values: np.ndarray
    positions: tuple[int, ...]
    scenarios: tuple[str, ...]
    snapshot_indices: tuple[int, ...]
    config_label: str
    reference_label: str


@dataclass
class RearHeadbandProfit:
    """Mean back-to-front gain ratio of mirror-image configurations."""

    values: np.ndarray
    positions: tuple[int, ...]
    scenarios: tuple[str, ...]
    snapshot_indices: tuple[int, ...]
    back_label: str
    front_label: str


def gain_tradeoff(grid_p: EigenGainGrid, grid_8: EigenGainGrid) -> GainTradeoff:
    """Mean over subcarriers of λ_p/λ_8 per (u, s, i)."""
    _check_same_axes(grid_p, grid_8)
    _require_positive(grid_8, "reference")
    values = np.mean(grid_p.values / grid_8.values, axis=3)
    return GainTradeoff(
        values=values,
        positions=grid_p.positions,
        scenarios=grid_p.scenarios,
        snapshot_indices=grid_p.snapshot_indices,
        config_label=grid_p.config.label,
        reference_label=grid_8.config.label,
    )


def volatility(grid: EigenGainGrid) -> VolatilityStats:
    """Per (u, s): population standard deviation and lag-1 autocorrelation
    of the subcarrier-averaged gain series over snapshots.

    The autocorrelation sums centered lag products over the first I-1
    snapshots and centered squares over all I, following the ratio form
    verbatim rather than a bias-corrected estimator.
    """
    series = grid_mean_over_subcarriers(grid)
    n_i = series.shape[2]
    if n_i < 2:
        raise ValueError("volatility needs at least two snapshots")

    mean = series.mean(axis=2)
    dev = series - mean[:, :, None]
    sq_sum = np.sum(dev ** 2, axis=2)
    delta = np.sqrt(sq_sum / n_i)
    lag_sum = np.sum(dev[:, :, :-1] * dev[:, :, 1:], axis=2)

    defined = delta > _CONSTANT_SERIES_RTOL * np.abs(mean)
    autocorr = np.full(mean.shape, np.nan)
    np.divide(lag_sum, sq_sum, out=autocorr, where=defined)
    return VolatilityStats(
        delta=delta,
        autocorr=autocorr,
        autocorr_defined=defined,
        mean_gain=mean,
        positions=grid.positions,
        scenarios=grid.scenarios,
        config_label=grid.config.label,
    )


def minimal_service_tradeoff(
    mean_gains_p: np.ndarray,
    mean_gains_8: np.ndarray,
    *,
    config_label: str = "",
    reference_label: str = "",
) -> MinimalServiceTradeoff:
    """|log2| of the ratio of pooled 3rd-percentile mean gains.

    Inputs are the subcarrier-averaged gains pooled over every (u, s, i)
    cell; the percentile is nearest-rank.
    """
    p_cfg = float(percentile(np.ravel(mean_gains_p), RELIABILITY_PERCENTILE))
    p_ref = float(percentile(np.ravel(mean_gains_8), RELIABILITY_PERCENTILE))
    if p_cfg <= 0.0 or p_ref <= 0.0:
        raise ValueError(
            f"3rd-percentile gain must be positive, got {p_cfg} vs {p_ref}"
        )
    return MinimalServiceTradeoff(
        delta_c=abs(math.log2(p_cfg / p_ref)),
        percentile_config=p_cfg,
        percentile_reference=p_ref,
        config_label=config_label,
        reference_label=reference_label,
    )


def capacity_tradeoff(grid_p: EigenGainGrid, grid_8: EigenGainGrid) -> CapacityTradeoff:
    """|mean over k of log2(λ_p/λ_8)| per (u, s, i); the absolute value is
    taken after averaging."""
    _check_same_axes(grid_p, grid_8)
    _require_positive(grid_p, "configuration")
    _require_positive(grid_8, "reference")
    values = np.abs(np.mean(np.log2(grid_p.values / grid_8.values), axis=3))
    return CapacityTradeoff(
        values=values,
        positions=grid_p.positions,
        scenarios=grid_p.scenarios,
        snapshot_indices=grid_p.snapshot_indices,
        config_label=grid_p.config.label,
        reference_label=grid_8.config.label,
    )


def rear_headband_profit(
    grid_back: EigenGainGrid, grid_front: EigenGainGrid
) -> RearHeadbandProfit:
    """Mean over subcarriers of λ_back/λ_front per (u, s, i) for a
    mirror-image pair of configurations with the same panel count."""
    _check_same_axes(grid_back, grid_front)
    front = grid_front.config
    back = grid_back.config
    if back.p != front.p:
        raise ValueError(
            f"panel counts differ: back has {back.p}, front has {front.p}"
        )
    mirrored = tuple(sorted((i + 4) % 8 for i in front.panels))
    if back.panels != mirrored:
        raise ValueError(
            f"configs are not mirror images: back {back.panels} vs "
            f"front rotated {mirrored}"
        )
    _require_positive(grid_front, "front")
    values = np.mean(grid_back.values / grid_front.values, axis=3)
    return RearHeadbandProfit(
        values=values,
        positions=grid_back.positions,
        scenarios=grid_back.scenarios,
        snapshot_indices=grid_back.snapshot_indices,
        back_label=back.label,
        front_label=front.label,
    )
