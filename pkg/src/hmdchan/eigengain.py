"""Per-subcarrier dominant-eigenmode gains for panel configurations.

Each de-noised snapshot is transformed to the frequency domain, restricted
to the receive rows of a panel configuration, and reduced to the dominant
squared singular value per subcarrier.  Stacking snapshots yields a gain
grid indexed by (position, scenario, snapshot, subcarrier).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from hmdchan.denoise import DenoiseParams, denoise
from hmdchan.geometry import DESK_LAYOUT, ArrayLayout, PanelConfig, rows_for_config
from hmdchan.tensors import CirSnapshot, fft_delay_axis, sweep_dominant_sq_singular_values

DEFAULT_SWEEP_CHUNK = 512

_KNOWN_LAYOUTS = (ArrayLayout(), DESK_LAYOUT)


def infer_layout(n_rx: int) -> ArrayLayout:
    """Match a row count against the known receiver layouts."""
    for layout in _KNOWN_LAYOUTS:
        if layout.n_rx == n_rx:
            return layout
    raise ValueError(
        f"cannot infer a panel layout from {n_rx} receive rows; pass layout="
    )


@dataclass
class EigenGainGrid:
    """Dominant-eigenmode gains on a complete (u, s, i, k) lattice."""

    values: np.ndarray
    config: PanelConfig
    positions: tuple[int, ...] = (0,)
    scenarios: tuple[str, ...] = ("LOS",)
    snapshot_indices: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 4:
            raise ValueError("grid values must have axes (u, s, i, k)")
        if not self.snapshot_indices:
            self.snapshot_indices = tuple(range(self.values.shape[2]))
        expected = (len(self.positions), len(self.scenarios),
                    len(self.snapshot_indices))
        if self.values.shape[:3] != expected:
            raise ValueError(
                f"grid shape {self.values.shape[:3]} does not match axis labels {expected}"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0.0):
            raise ValueError("grid values must be finite and non-negative")

    @property
    def n_subcarriers(self) -> int:
        return self.values.shape[3]


def subcarrier_gain_slice(
    clean: CirSnapshot,
    config: PanelConfig,
    *,
    layout: ArrayLayout | None = None,
    chunk: int = DEFAULT_SWEEP_CHUNK,
) -> np.ndarray:
    """Gains λ[k] for one already de-noised snapshot.

    The FFT runs only over the configuration's rows; the subcarrier sweep is
    chunked to bound the size of the intermediate Gram stack.
    """
    if layout is None:
        layout = infer_layout(clean.n_rx)
    elif layout.n_rx != clean.n_rx:
        raise ValueError(
            f"layout expects {layout.n_rx} rows but snapshot has {clean.n_rx}"
        )
    rows = rows_for_config(config, layout)
    ctf = fft_delay_axis(
        CirSnapshot(tensor=clean.tensor[rows], tap_spacing=clean.tap_spacing,
                    key=clean.key)
    )
    stack = np.moveaxis(ctf.tensor, 2, 0)
    return sweep_dominant_sq_singular_values(stack, chunk=chunk)


def compute_grid(
    snapshots: list[CirSnapshot],
    config: PanelConfig,
    params: DenoiseParams | None = None,
    *,
    layout: ArrayLayout | None = None,
    chunk: int = DEFAULT_SWEEP_CHUNK,
) -> EigenGainGrid:
    """De-noise each snapshot and assemble the per-subcarrier gain grid.

    The snapshot keys must fill a complete (position, scenario, snapshot)
    lattice; de-noising always sees the full receive array, so the threshold
    does not depend on the panel configuration under study.
    """
    if not snapshots:
        raise ValueError("no snapshots given")
    first = snapshots[0]
    for snap in snapshots[1:]:
        if (snap.tensor.shape != first.tensor.shape
                or snap.tap_spacing != first.tap_spacing):
            raise ValueError("snapshots do not share dimensions")

    slices: dict[tuple[int, str, int], np.ndarray] = {}
    for snap in snapshots:
        cell = (snap.key.u, snap.key.s, snap.key.i)
        if cell in slices:
            raise ValueError(f"duplicate snapshot for cell {cell}")
        clean, _ = denoise(snap, params)
        slices[cell] = subcarrier_gain_slice(clean, config, layout=layout,
                                             chunk=chunk)

    positions = tuple(sorted({c[0] for c in slices}))
    scenarios = tuple(s for s in ("LOS", "NLOS") if any(c[1] == s for c in slices))
    indices = tuple(sorted({c[2] for c in slices}))
    missing = [c for c in product(positions, scenarios, indices) if c not in slices]
    if missing:
        raise ValueError(f"incomplete grid, missing cells: {missing[:5]}")

    n_k = first.n_tap
    values = np.empty((len(positions), len(scenarios), len(indices), n_k))
    for (ui, u) in enumerate(positions):
        for (si, s) in enumerate(scenarios):
            for (ii, i) in enumerate(indices):
                values[ui, si, ii] = slices[(u, s, i)]
    return EigenGainGrid(values=values, config=config, positions=positions,
                         scenarios=scenarios, snapshot_indices=indices)


def grid_mean_over_subcarriers(grid: EigenGainGrid) -> np.ndarray:
    """Arithmetic mean over the subcarrier axis: λ̄[u, s, i]."""
    return grid.values.mean(axis=3)
