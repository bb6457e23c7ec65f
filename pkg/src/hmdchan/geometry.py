"""Octagonal receiver geometry, panel configurations, and head mobility.

The receiver is an octagon of 8 dual-polarized patch panels, 45 degrees
apart in azimuth.  Panel VII faces the looking direction (+x in the local
frame, azimuth 0); panel III faces backward (azimuth 180).  Numbering runs
counterclockwise, so panel azimuth = ((index - 6) mod 8) * 45 degrees with
panels named I..VIII for indices 0..7.

Receive rows are ordered panel-major: row = panel * (elements_per_panel *
polarizations) + element * polarizations + polarization.  The mapping is a
fixed convention of this module; all downstream results depend only on row
subsets, not on the particular bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PANEL_NAMES = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")
LOOKING_PANEL = 6  # panel VII
REAR_PANEL = 2  # panel III

# Forward-facing panel sets per panel count p.  p = 1..4 follow the studied
# configurations (front panel; side pair; front + rear diagonals; all four
# diagonals).  p = 5..7 extend the same scheme: maximally uniform azimuth
# coverage, left-right symmetric, rear panel III excluded, which also keeps
# the odd chain nested (1 in 3 in 5 in 7).
FORWARD_PANEL_SETS: dict[int, tuple[int, ...]] = {
    1: (6,),
    2: (0, 4),
    3: (1, 3, 6),
    4: (1, 3, 5, 7),
    5: (1, 3, 5, 6, 7),
    6: (0, 1, 3, 4, 5, 7),
    7: (0, 1, 3, 4, 5, 6, 7),
    8: (0, 1, 2, 3, 4, 5, 6, 7),
}

# Backward-facing counterparts: the forward pattern rotated by 180 degrees
# (panel index + 4 mod 8).  Odd-p sets then contain panel III; even-p sets
# are themselves 180-degree symmetric and map onto themselves, so their
# backward configuration is identical to the forward one.
BACKWARD_PANEL_SETS: dict[int, tuple[int, ...]] = {
    p: tuple(sorted((i + 4) % 8 for i in panels))
    for p, panels in FORWARD_PANEL_SETS.items()
}

FACINGS = ("forward", "backward")


def panel_azimuth_deg(panel: int) -> float:
    """Azimuth of a panel's outward normal, degrees CCW from the looking direction."""
    if not 0 <= panel < 8:
        raise ValueError(f"panel index must be in [0, 8), got {panel}")
    return ((panel - LOOKING_PANEL) % 8) * 45.0


@dataclass(frozen=True)
class PanelConfig:
    """A subset of the 8 panels with a facing tag."""

    panels: tuple[int, ...]
    facing: str = "forward"

    def __post_init__(self):
        panels = tuple(sorted(int(i) for i in self.panels))
        if not panels:
            raise ValueError("panel set must be non-empty")
        if len(set(panels)) != len(panels):
            raise ValueError(f"duplicate panels in {panels}")
        if panels[0] < 0 or panels[-1] > 7:
            raise ValueError(f"panel indices must be in [0, 8), got {panels}")
        if self.facing not in FACINGS:
            raise ValueError(f"facing must be one of {FACINGS}, got {self.facing!r}")
        object.__setattr__(self, "panels", panels)

    @classmethod
    def forward(cls, p: int) -> "PanelConfig":
        if p not in FORWARD_PANEL_SETS:
            raise ValueError(f"panel count must be in 1..8, got {p}")
        return cls(FORWARD_PANEL_SETS[p], "forward")

    @classmethod
    def backward(cls, p: int) -> "PanelConfig":
        if p not in BACKWARD_PANEL_SETS:
            raise ValueError(f"panel count must be in 1..8, got {p}")
        return cls(BACKWARD_PANEL_SETS[p], "backward")

    @property
    def p(self) -> int:
        return len(self.panels)

    @property
    def mask(self) -> str:
        """Membership mask over panels I..VIII, e.g. '01010010' for {II, IV, VII}."""
        return "".join("1" if i in self.panels else "0" for i in range(8))

    @property
    def label(self) -> str:
        return f"{self.facing}-{self.p}p-{self.mask}"


@dataclass(frozen=True)
class ArrayLayout:
    """Element arrangement of the octagonal receiver.

    elements_per_panel must be a perfect square (a 4x4 grid at full scale,
    2x2 in desk-scale runs); element_pitch is the half-wavelength grid step.
    """

    elements_per_panel: int = 16
    polarizations: int = 2
    element_pitch: float = 5.357e-3
    panel_radius: float = 0.05

    def __post_init__(self):
        side = math.isqrt(self.elements_per_panel)
        if side * side != self.elements_per_panel or side == 0:
            raise ValueError(
                f"elements_per_panel must be a positive square, got {self.elements_per_panel}"
            )
        if self.polarizations not in (1, 2):
            raise ValueError("polarizations must be 1 or 2")
        if self.element_pitch <= 0 or self.panel_radius <= 0:
            raise ValueError("element_pitch and panel_radius must be positive")

    @property
    def panel_side(self) -> int:
        return math.isqrt(self.elements_per_panel)

    @property
    def rows_per_panel(self) -> int:
        return self.elements_per_panel * self.polarizations

    @property
    def n_rx(self) -> int:
        return 8 * self.rows_per_panel

    @property
    def panel_azimuths(self) -> tuple[float, ...]:
        return tuple(panel_azimuth_deg(i) for i in range(8))


DESK_LAYOUT = ArrayLayout(elements_per_panel=4)


def rows_for_config(config: PanelConfig, layout: ArrayLayout) -> np.ndarray:
    """Sorted receive-row indices covered by a panel configuration."""
    if not config.panels:
        raise ValueError("panel set must be non-empty")
    rpp = layout.rows_per_panel
    blocks = [np.arange(panel * rpp, (panel + 1) * rpp) for panel in config.panels]
    return np.concatenate(blocks)


@dataclass(frozen=True)
class Orientation:
    """Extrinsic-xyz Euler pose: yaw about vertical (positive leftward /
    counterclockwise from above), then pitch about the lateral axis
    (positive toward the ground)."""

    yaw_deg: float = 0.0
    pitch_deg: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.yaw_deg) and math.isfinite(self.pitch_deg)):
            raise ValueError("orientation angles must be finite")

    def rotation_matrix(self) -> np.ndarray:
        """World-from-local rotation, R = Rz(yaw) @ Ry(pitch)."""
        a = math.radians(self.yaw_deg)
        b = math.radians(self.pitch_deg)
        rz = np.array(
            [
                [math.cos(a), -math.sin(a), 0.0],
                [math.sin(a), math.cos(a), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        ry = np.array(
            [
                [math.cos(b), 0.0, math.sin(b)],
                [0.0, 1.0, 0.0],
                [-math.sin(b), 0.0, math.cos(b)],
            ]
        )
        return rz @ ry


@dataclass(frozen=True)
class Pose:
    """Rigid placement of the receiver: center-of-mass position + orientation."""

    position: np.ndarray
    orientation: Orientation

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ValueError("position must be a finite 3-vector")
        pos = pos.copy()
        pos.flags.writeable = False
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class MobilityPattern:
    """Piecewise-constant-rate head rotation: per-segment durations and
    (yaw, pitch) increments, rotating about a center displaced below the
    receiver's center of mass (the neck joint)."""

    segment_durations: tuple[float, ...] = (3.0, 15.0, 15.0)
    segment_deltas: tuple[tuple[float, float], ...] = (
        (30.0, 0.0),
        (0.0, 30.0),
        (30.0, 0.0),
    )
    rotation_center_offset: float = 0.25
    snapshot_rate: float = 1.0

    def __post_init__(self):
        if len(self.segment_durations) != len(self.segment_deltas):
            raise ValueError("one (yaw, pitch) delta is required per segment")
        if not self.segment_durations:
            raise ValueError("at least one segment is required")
        if any(d <= 0 for d in self.segment_durations):
            raise ValueError("segment durations must be positive")
        if self.rotation_center_offset < 0:
            raise ValueError("rotation_center_offset must be non-negative")
        if self.snapshot_rate <= 0:
            raise ValueError("snapshot_rate must be positive")

    @property
    def total_duration(self) -> float:
        return float(sum(self.segment_durations))

    @property
    def n_snapshots(self) -> int:
        """One snapshot per 1/rate interval starting at t = 0 (33 at defaults)."""
        return max(int(round(self.total_duration * self.snapshot_rate)), 1)

    def snapshot_times(self) -> np.ndarray:
        times = np.arange(self.n_snapshots) / self.snapshot_rate
        return np.minimum(times, self.total_duration)


def orientation_at(t: float, pattern: MobilityPattern) -> Orientation:
    """Orientation after t seconds of the pattern, constant rate per segment."""
    if not 0.0 <= t <= pattern.total_duration:
        raise ValueError(
            f"t must lie in [0, {pattern.total_duration}] s, got {t}"
        )
    yaw = pitch = 0.0
    remaining = t
    for duration, (dyaw, dpitch) in zip(
        pattern.segment_durations, pattern.segment_deltas
    ):
        frac = min(max(remaining / duration, 0.0), 1.0)
        yaw += frac * dyaw
        pitch += frac * dpitch
        remaining -= duration
        if remaining <= 0.0:
            break
    return Orientation(yaw_deg=yaw, pitch_deg=pitch)


def ue_pose_at(t: float, pattern: MobilityPattern, base) -> Pose:
    """Center-of-mass pose at time t.

    The rotation center sits rotation_center_offset below the center of
    mass at the start pose; the center of mass orbits it rigidly, so the
    pitch segment sweeps a chord 2 * offset * sin(delta/2).
    """
    orientation = orientation_at(t, pattern)
    base = np.asarray(base, dtype=np.float64)
    if base.shape != (3,):
        raise ValueError("base position must be a 3-vector")
    arm = np.array([0.0, 0.0, pattern.rotation_center_offset])
    center = base - arm
    position = center + orientation.rotation_matrix() @ arm
    return Pose(position=position, orientation=orientation)


def element_position_and_boresight(
    row: int, layout: ArrayLayout, pose: Pose
) -> tuple[np.ndarray, np.ndarray]:
    """World position and outward boresight of one receive row.

    Elements sit on a panel_side x panel_side grid in the panel plane
    (spanned by the panel tangent and vertical), centered on the panel
    center at panel_radius along the outward normal.  Both polarization
    rows of an element are co-located.
    """
    if not 0 <= row < layout.n_rx:
        raise ValueError(f"row must be in [0, {layout.n_rx}), got {row}")
    panel, within = divmod(row, layout.rows_per_panel)
    element = within // layout.polarizations
    side = layout.panel_side
    grid_row, grid_col = divmod(element, side)

    az = math.radians(panel_azimuth_deg(panel))
    normal = np.array([math.cos(az), math.sin(az), 0.0])
    tangent = np.array([-math.sin(az), math.cos(az), 0.0])
    vertical = np.array([0.0, 0.0, 1.0])

    half = (side - 1) / 2.0
    local = (
        layout.panel_radius * normal
        + (grid_col - half) * layout.element_pitch * tangent
        + (half - grid_row) * layout.element_pitch * vertical
    )
    rot = pose.orientation.rotation_matrix()
    return pose.position + rot @ local, rot @ normal
