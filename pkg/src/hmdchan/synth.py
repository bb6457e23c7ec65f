"""Geometric multipath channel synthesizer.

Renders CIR snapshot sequences for an authored scene: a list of discrete
multipath components (complex gain, delay, arrival/departure angles), an
access-point array, the octagonal receiver moving through a mobility
pattern, and an optional cylindrical blocker attenuating whichever paths
it intersects.  Each component contributes a rank-1 (rx x tx) outer
product of element responses times a unit-energy band-limited pulse on the
delay grid; circularly-symmetric Gaussian noise is added per snapshot from
seed-derived substreams, so renders are bit-reproducible and snapshots can
be produced independently (and in parallel) without changing the output.

Angles are degrees in the world frame: azimuth counterclockwise from +x
when seen from above, elevation positive toward +z.  Arrival directions
point from the receiver toward the incoming wave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from hmdchan.geometry import (
    ArrayLayout,
    MobilityPattern,
    Pose,
    element_position_and_boresight,
    ue_pose_at,
)
from hmdchan.tensors import CirSnapshot, MeasurementKey, DEFAULT_TAP_SPACING

SPEED_OF_LIGHT = 299792458.0
CARRIER_FREQUENCY = 28e9
CARRIER_WAVELENGTH = SPEED_OF_LIGHT / CARRIER_FREQUENCY

PULSE_SUPPORT_TAPS = 8  # one-sided; total window is 2 * 8 + 1 taps
PATTERN_EXPONENT = 2  # cos^q element amplitude pattern

DEFAULT_N_TAP = 2048
DEFAULT_ROOM_BOUNDS = (6.0, 9.15, 3.0)


def unit_from_angles(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
    )


def angles_from_vector(v) -> tuple[float, float]:
    """(azimuth, elevation) of a direction vector, degrees."""
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("zero vector has no direction")
    az = math.degrees(math.atan2(v[1], v[0]))
    el = math.degrees(math.asin(v[2] / norm))
    return az, el


@dataclass(frozen=True)
class Mpc:
    """One multipath component.

    aoa/aod are (azimuth, elevation) pairs at the receiver and access
    point; pol_weights scale the two receive polarization rows of every
    element (the synthesizer does not model a full polarimetric channel).
    """

    complex_gain: complex
    excess_delay: float
    aoa: tuple[float, float]
    aod: tuple[float, float]
    is_los: bool = False
    order: int = 0
    pol_weights: tuple[float, float] = (1.0, 0.3)

    def __post_init__(self):
        if abs(self.complex_gain) == 0.0 or not np.isfinite(self.complex_gain):
            raise ValueError("complex_gain must be finite and non-zero")
        if not 0.0 <= self.excess_delay or not math.isfinite(self.excess_delay):
            raise ValueError("excess_delay must be finite and non-negative")
        if self.order < 0 or (self.is_los and self.order != 0):
            raise ValueError("reflection order must be >= 0, and 0 for the LOS path")

    def arrival_direction(self) -> np.ndarray:
        return unit_from_angles(*self.aoa)

    def departure_direction(self) -> np.ndarray:
        return unit_from_angles(*self.aod)


@dataclass(frozen=True)
class Blocker:
    """Vertical cylinder (a person standing in the room); paths crossing it
    are attenuated by loss_db."""

    center: tuple[float, float, float]
    radius: float
    height: float
    loss_db: float = 20.0

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("blocker radius and height must be positive")
        if self.loss_db < 0:
            raise ValueError("loss_db must be non-negative")

    @property
    def z_interval(self) -> tuple[float, float]:
        cz = self.center[2]
        return (cz - self.height / 2.0, cz + self.height / 2.0)


@dataclass(frozen=True)
class ApArray:
    """Planar dual-polarized access-point array (16 x 4 at full scale).

    Transmit column index = element * polarizations + polarization with
    elements row-major on the n_rows x n_cols grid.
    """

    n_rows: int = 4
    n_cols: int = 16
    polarizations: int = 2
    element_pitch: float = 5.357e-3
    boresight_azimuth_deg: float = 0.0
    boresight_elevation_deg: float = 0.0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array grid must be at least 1x1")
        if self.polarizations not in (1, 2):
            raise ValueError("polarizations must be 1 or 2")
        if self.element_pitch <= 0:
            raise ValueError("element_pitch must be positive")
        if abs(self.boresight_elevation_deg) >= 90.0:
            raise ValueError("boresight elevation must lie in (-90, 90) degrees")

    @property
    def n_tx(self) -> int:
        return self.n_rows * self.n_cols * self.polarizations

    def boresight(self) -> np.ndarray:
        return unit_from_angles(self.boresight_azimuth_deg, self.boresight_elevation_deg)

    def element_offset(self, column: int) -> np.ndarray:
        """Element position relative to the array phase center."""
        if not 0 <= column < self.n_tx:
            raise ValueError(f"column must be in [0, {self.n_tx}), got {column}")
        element = column // self.polarizations
        grid_row, grid_col = divmod(element, self.n_cols)
        normal = self.boresight()
        lateral = np.cross([0.0, 0.0, 1.0], normal)
        lateral /= np.linalg.norm(lateral)
        upward = np.cross(normal, lateral)
        return (
            (grid_col - (self.n_cols - 1) / 2.0) * self.element_pitch * lateral
            + ((self.n_rows - 1) / 2.0 - grid_row) * self.element_pitch * upward
        )


DESK_AP_ARRAY = ApArray(n_rows=4, n_cols=4)


@dataclass(frozen=True)
class Scene:
    """Authored propagation scene: AP, receiver start position, room box
    (x, y, z extents with one corner at the origin), path list, and an
    optional blocker."""

    ap_position: tuple[float, float, float]
    ue_base_position: tuple[float, float, float]
    mpcs: tuple[Mpc, ...]
    ap_array: ApArray = field(default_factory=ApArray)
    room_bounds: tuple[float, float, float] = DEFAULT_ROOM_BOUNDS
    blocker: Blocker | None = None

    def __post_init__(self):
        if any(b <= 0 for b in self.room_bounds):
            raise ValueError("room bounds must be positive")
        for name, pos in (("ap_position", self.ap_position),
                          ("ue_base_position", self.ue_base_position)):
            if len(pos) != 3 or not all(math.isfinite(v) for v in pos):
                raise ValueError(f"{name} must be a finite 3-vector")
            if not all(0.0 <= v <= b for v, b in zip(pos, self.room_bounds)):
                raise ValueError(f"{name} {pos} lies outside room bounds {self.room_bounds}")
        if sum(1 for m in self.mpcs if m.is_los) > 1:
            raise ValueError("at most one LOS-tagged path is allowed")
        object.__setattr__(self, "mpcs", tuple(self.mpcs))

    def los_mpc(self) -> Mpc | None:
        for m in self.mpcs:
            if m.is_los:
                return m
        return None


def element_response(mpc: Mpc, element_position, boresight, q: int = PATTERN_EXPONENT) -> complex:
    """Complex receive-element response to one path.

    Amplitude cos^q(theta) for off-boresight angle theta below 90 degrees
    (zero behind the panel); phase from the plane-wave delay across the
    element offset.  element_position is relative to the array phase
    center; boresight must be a unit vector.
    """
    direction = mpc.arrival_direction()
    return _steering(direction, np.atleast_2d(element_position),
                     np.atleast_2d(boresight), q)[0]


def _steering(direction: np.ndarray, positions: np.ndarray,
              boresights: np.ndarray, q: int = PATTERN_EXPONENT) -> np.ndarray:
    """Vectorized element responses for one plane wave: (n,) complex."""
    cos_theta = boresights @ direction
    amplitude = np.where(cos_theta > 0.0, np.maximum(cos_theta, 0.0) ** q, 0.0)
    phase = np.exp(-2j * np.pi / CARRIER_WAVELENGTH * (positions @ direction))
    return amplitude * phase


def band_limited_pulse(delay: float, tap_spacing: float, n_tap: int) -> np.ndarray:
    """Unit-energy windowed sinc centered at delay on the tap grid.

    Support is +-8 taps around the center, truncated at the grid bounds;
    energy is normalized over the surviving taps, so sum |coeff|^2 == 1
    for any in-range delay.  On-grid delays reduce to a single unit tap.
    """
    if delay < 0:
        raise ValueError("delay must be non-negative")
    if tap_spacing <= 0 or n_tap < 1:
        raise ValueError("tap grid must be non-empty with positive spacing")
    center = delay / tap_spacing
    if center >= n_tap:
        raise ValueError(
            f"delay {delay} exceeds the tap grid ({n_tap} taps at {tap_spacing} s)"
        )
    lo = max(int(math.ceil(center - PULSE_SUPPORT_TAPS)), 0)
    hi = min(int(math.floor(center + PULSE_SUPPORT_TAPS)), n_tap - 1)
    taps = np.arange(lo, hi + 1)
    x = taps - center
    window = 0.5 * (1.0 + np.cos(np.pi * x / (PULSE_SUPPORT_TAPS + 0.5)))
    coeffs = np.sinc(x) * window
    norm = np.linalg.norm(coeffs)
    if norm < 1e-12:
        raise ValueError("pulse support degenerates at the edge of the tap grid")
    coeffs /= norm
    pulse = np.zeros(n_tap)
    pulse[taps] = coeffs
    return pulse


def _segment_hits_cylinder(a: np.ndarray, b: np.ndarray, blocker: Blocker) -> bool:
    """Does the segment a->b pass through the blocker cylinder?"""
    cx, cy, _ = blocker.center
    d = b - a
    rel = np.array([a[0] - cx, a[1] - cy])
    dxy = d[:2]
    qa = dxy @ dxy
    qb = 2.0 * (rel @ dxy)
    qc = rel @ rel - blocker.radius**2
    if qa < 1e-30:
        if qc > 0.0:
            return False
        t_lo, t_hi = 0.0, 1.0
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc <= 0.0:
            return False
        root = math.sqrt(disc)
        t_lo = max((-qb - root) / (2.0 * qa), 0.0)
        t_hi = min((-qb + root) / (2.0 * qa), 1.0)
        if t_lo >= t_hi:
            return False
    z0, z1 = blocker.z_interval
    za = a[2] + t_lo * d[2]
    zb = a[2] + t_hi * d[2]
    return max(za, zb) >= z0 and min(za, zb) <= z1


def _exit_point(origin: np.ndarray, direction: np.ndarray,
                bounds: tuple[float, float, float]) -> np.ndarray:
    """Where a ray from origin leaves the room box (origin if it starts outside)."""
    t_exit = math.inf
    for axis in range(3):
        d = direction[axis]
        if abs(d) < 1e-15:
            continue
        for wall in (0.0, bounds[axis]):
            t = (wall - origin[axis]) / d
            if t > 0.0:
                t_exit = min(t_exit, t)
    if not math.isfinite(t_exit):
        t_exit = 0.0
    return origin + max(t_exit, 0.0) * direction


def apply_blockage(scene: Scene, pose: Pose) -> list[Mpc]:
    """Attenuate paths whose final leg crosses the blocker.

    The LOS leg runs from the AP to the receiver's center of mass; a
    reflected path's final leg is traced from the center of mass along its
    arrival direction until it leaves the room.  Blocked gains are scaled
    by 10^(-loss_db / 20).
    """
    if scene.blocker is None:
        return list(scene.mpcs)
    scale = 10.0 ** (-scene.blocker.loss_db / 20.0)
    com = np.asarray(pose.position, dtype=np.float64)
    out = []
    for mpc in scene.mpcs:
        if mpc.is_los:
            far_end = np.asarray(scene.ap_position, dtype=np.float64)
        else:
            far_end = _exit_point(com, mpc.arrival_direction(), scene.room_bounds)
        if _segment_hits_cylinder(com, far_end, scene.blocker):
            mpc = replace(mpc, complex_gain=mpc.complex_gain * scale)
        out.append(mpc)
    return out


def _rx_geometry(layout: ArrayLayout, pose: Pose) -> tuple[np.ndarray, np.ndarray]:
    """Receive positions (relative to the center of mass) and boresights."""
    origin = Pose(position=np.zeros(3), orientation=pose.orientation)
    positions = np.empty((layout.n_rx, 3))
    boresights = np.empty((layout.n_rx, 3))
    for row in range(layout.n_rx):
        positions[row], boresights[row] = element_position_and_boresight(
            row, layout, origin
        )
    return positions, boresights


def _tx_geometry(ap: ApArray) -> tuple[np.ndarray, np.ndarray]:
    positions = np.array([ap.element_offset(c) for c in range(ap.n_tx)])
    boresights = np.broadcast_to(ap.boresight(), (ap.n_tx, 3)).copy()
    return positions, boresights


def synthesize_snapshot(
    scene: Scene,
    pose: Pose,
    *,
    layout: ArrayLayout | None = None,
    n_tap: int = DEFAULT_N_TAP,
    tap_spacing: float = DEFAULT_TAP_SPACING,
    noise_power: float = 0.0,
    rng: np.random.Generator | None = None,
    key: MeasurementKey | None = None,
) -> CirSnapshot:
    """Render one CIR snapshot of the scene at a fixed pose."""
    if layout is None:
        layout = ArrayLayout()
    if noise_power < 0:
        raise ValueError("noise_power must be non-negative")
    if noise_power > 0 and rng is None:
        raise ValueError("noise_power > 0 requires an rng")
    max_delay = n_tap * tap_spacing
    for mpc in scene.mpcs:
        if mpc.excess_delay >= max_delay:
            raise ValueError(
                f"path delay {mpc.excess_delay} s exceeds the {max_delay} s grid"
            )

    rx_pos, rx_bore = _rx_geometry(layout, pose)
    tx_pos, tx_bore = _tx_geometry(scene.ap_array)
    rx_pol = np.arange(layout.n_rx) % layout.polarizations

    tensor = np.zeros((layout.n_rx, scene.ap_array.n_tx, n_tap), dtype=np.complex128)
    for mpc in apply_blockage(scene, pose):
        rx_resp = _steering(mpc.arrival_direction(), rx_pos, rx_bore)
        rx_resp = rx_resp * np.asarray(mpc.pol_weights)[rx_pol]
        tx_resp = _steering(mpc.departure_direction(), tx_pos, tx_bore)
        pulse = band_limited_pulse(mpc.excess_delay, tap_spacing, n_tap)
        (support,) = np.nonzero(pulse)
        if support.size == 0:
            continue
        lo, hi = support[0], support[-1] + 1
        outer = mpc.complex_gain * np.outer(rx_resp, tx_resp)
        tensor[:, :, lo:hi] += outer[:, :, np.newaxis] * pulse[lo:hi]

    if noise_power > 0:
        # one draw in interleaved (re, im) layout viewed as complex, so the
        # 1 GB full-scale tensor needs a single extra allocation
        noise = rng.standard_normal((layout.n_rx, scene.ap_array.n_tx, n_tap, 2))
        noise *= math.sqrt(noise_power / 2.0)
        tensor += noise.view(np.complex128)[..., 0]
        del noise

    return CirSnapshot(
        tensor=tensor,
        tap_spacing=tap_spacing,
        key=key or MeasurementKey(),
    )


def iter_measurement(
    scene: Scene,
    pattern: MobilityPattern,
    noise_power: float,
    seed: int,
    *,
    layout: ArrayLayout | None = None,
    n_tap: int = DEFAULT_N_TAP,
    tap_spacing: float = DEFAULT_TAP_SPACING,
    u: int = 0,
    s: str = "LOS",
):
    """Yield the snapshot sequence one CIR at a time (33 at defaults).

    Noise for snapshot i comes from the i-th spawned child of the seed, so
    the sequence is reproducible and any subset of snapshots can be
    rendered independently.
    """
    base = np.asarray(scene.ue_base_position, dtype=np.float64)
    times = pattern.snapshot_times()
    children = np.random.SeedSequence(seed).spawn(len(times))
    for i, t in enumerate(times):
        pose = ue_pose_at(float(t), pattern, base)
        yield synthesize_snapshot(
            scene,
            pose,
            layout=layout,
            n_tap=n_tap,
            tap_spacing=tap_spacing,
            noise_power=noise_power,
            rng=np.random.default_rng(children[i]) if noise_power > 0 else None,
            key=MeasurementKey(u=u, s=s, i=i),
        )


def synthesize_measurement(
    scene: Scene,
    pattern: MobilityPattern,
    noise_power: float,
    seed: int,
    **kwargs,
) -> list[CirSnapshot]:
    """Render the full snapshot list (prefer iter_measurement at full scale)."""
    return list(iter_measurement(scene, pattern, noise_power, seed, **kwargs))
