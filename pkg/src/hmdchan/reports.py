"""Plot-ready CSV emitters for the metric outputs.

Every file has a header row and a fixed column order; floats are printed
with 12 significant digits so identical inputs yield identical bytes.
Schema changes will be versioned with a suffix in the file name.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from hmdchan.denoise import DenoiseReport
from hmdchan.eigengain import EigenGainGrid, grid_mean_over_subcarriers
from hmdchan.metrics import (
    CapacityTradeoff,
    GainTradeoff,
    MinimalServiceTradeoff,
    RearHeadbandProfit,
    VolatilityStats,
)

UNDEFINED = "undef"


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_rows(path, header, rows) -> None:
    with open(Path(path), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _snapshot_rows(metric, value_name):
    rows = []
    for ui, u in enumerate(metric.positions):
        for si, s in enumerate(metric.scenarios):
            for ii, i in enumerate(metric.snapshot_indices):
                rows.append([u, s, i, _fmt(metric.values[ui, si, ii])])
    return rows


def write_mean_gain_csv(path, grids: list[EigenGainGrid]) -> None:
    """Subcarrier-averaged gain per configuration and (u, s, i)."""
    rows = []
    for grid in grids:
        mean = grid_mean_over_subcarriers(grid)
        for ui, u in enumerate(grid.positions):
            for si, s in enumerate(grid.scenarios):
                for ii, i in enumerate(grid.snapshot_indices):
                    rows.append([grid.config.label, u, s, i,
                                 _fmt(mean[ui, si, ii])])
    _write_rows(path, ["config", "u", "s", "i", "mean_gain"], rows)


def write_denoise_report_csv(path, reports: list[tuple[int, DenoiseReport]]) -> None:
    rows = [
        [i, _fmt(rep.threshold), rep.taps_kept,
         rep.taps_zeroed_by_threshold, rep.taps_zeroed_by_window]
        for i, rep in reports
    ]
    _write_rows(path, ["i", "threshold", "taps_kept", "taps_zeroed_by_threshold",
                       "taps_zeroed_by_window"], rows)


def write_gain_tradeoff_csv(path, tradeoffs: list[GainTradeoff]) -> None:
    rows = []
    for t in tradeoffs:
        for row in _snapshot_rows(t, "gain_ratio"):
            rows.append([t.config_label, t.reference_label] + row)
    _write_rows(path, ["config", "reference", "u", "s", "i", "gain_ratio"], rows)


def write_volatility_csv(path, stats: list[VolatilityStats]) -> None:
    rows = []
    for st in stats:
        for ui, u in enumerate(st.positions):
            for si, s in enumerate(st.scenarios):
                r = (_fmt(st.autocorr[ui, si])
                     if st.autocorr_defined[ui, si] else UNDEFINED)
                rows.append([st.config_label, u, s, _fmt(st.mean_gain[ui, si]),
                             _fmt(st.delta[ui, si]), r])
    _write_rows(path, ["config", "u", "s", "mean_gain", "delta", "autocorr"],
                rows)


def write_minimal_service_csv(path, items: list[MinimalServiceTradeoff]) -> None:
    rows = [
        [m.config_label, m.reference_label, _fmt(m.percentile_config),
         _fmt(m.percentile_reference), _fmt(m.delta_c)]
        for m in items
    ]
    _write_rows(path, ["config", "reference", "p3_config", "p3_reference",
                       "delta_c_bits"], rows)


def write_capacity_csv(path, tradeoffs: list[CapacityTradeoff]) -> None:
    rows = []
    for t in tradeoffs:
        for row in _snapshot_rows(t, "delta_c_bits"):
            rows.append([t.config_label, t.reference_label] + row)
    _write_rows(path, ["config", "reference", "u", "s", "i", "delta_c_bits"],
                rows)


def write_rear_headband_csv(path, profits: list[RearHeadbandProfit]) -> None:
    rows = []
    for t in profits:
        for ui, u in enumerate(t.positions):
            for si, s in enumerate(t.scenarios):
                for ii, i in enumerate(t.snapshot_indices):
                    rows.append([t.back_label, t.front_label, u, s, i,
                                 _fmt(t.values[ui, si, ii])])
    _write_rows(path, ["back", "front", "u", "s", "i", "profit"], rows)


# ---------------------------------------------------------------------------
# Plot-ready files: one per figure family, deliberately denormalized so a
# plotting tool needs no joins.

def write_gain_distribution_csv(path, tradeoffs: list[GainTradeoff],
                                panel_counts: list[int]) -> None:
    """Gain-ratio distributions per panel count (box-plot source)."""
    rows = []
    for p, t in zip(panel_counts, tradeoffs):
        for row in _snapshot_rows(t, "gain_ratio"):
            rows.append([p, t.config_label] + row)
    _write_rows(path, ["p", "config", "u", "s", "i", "gain_ratio"], rows)


def write_volatility_scatter_csv(path, stats: list[VolatilityStats],
                                 panel_counts: list[int]) -> None:
    """Standard deviation vs autocorrelation scatter with mean gain."""
    rows = []
    for p, st in zip(panel_counts, stats):
        for ui, u in enumerate(st.positions):
            for si, s in enumerate(st.scenarios):
                r = (_fmt(st.autocorr[ui, si])
                     if st.autocorr_defined[ui, si] else UNDEFINED)
                rows.append([p, st.config_label, u, s,
                             _fmt(st.delta[ui, si]), r,
                             _fmt(st.mean_gain[ui, si])])
    _write_rows(path, ["p", "config", "u", "s", "delta", "autocorr",
                       "mean_gain"], rows)


def write_capacity_cdf_csv(path, tradeoffs: list[CapacityTradeoff],
                           panel_counts: list[int]) -> None:
    """Empirical CDF of the capacity trade-off per panel count."""
    rows = []
    for p, t in zip(panel_counts, tradeoffs):
        values = np.sort(t.values.ravel())
        n = values.size
        for j, v in enumerate(values):
            rows.append([p, t.config_label, _fmt(v), _fmt((j + 1) / n)])
    _write_rows(path, ["p", "config", "delta_c_bits", "cdf"], rows)


def write_rear_histogram_csv(path, profits: list[RearHeadbandProfit],
                             panel_counts: list[int], bins: int = 20) -> None:
    """Histogram of the rear-headband gain ratio per panel count."""
    rows = []
    for p, t in zip(panel_counts, profits):
        values = t.values.ravel()
        counts, edges = np.histogram(values, bins=bins)
        for j in range(bins):
            rows.append([p, t.back_label, t.front_label,
                         _fmt(edges[j]), _fmt(edges[j + 1]), int(counts[j])])
    _write_rows(path, ["p", "back", "front", "bin_left", "bin_right", "count"],
                rows)
