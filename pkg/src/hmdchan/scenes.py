"""Scene construction and JSON (de)serialization.

A scene JSON document mirrors the Scene dataclass; complex gains are
stored as [re, im] pairs.  random_scene draws plausible indoor scenes
(LOS geometry derived from the AP/receiver placement plus a handful of
reflections) for ensemble experiments and tests.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from hmdchan.geometry import Orientation, Pose
from hmdchan.synth import (
    SPEED_OF_LIGHT,
    ApArray,
    Blocker,
    Mpc,
    Scene,
    angles_from_vector,
)


def scene_to_dict(scene: Scene) -> dict:
    return {
        "ap_position": list(scene.ap_position),
        "ue_base_position": list(scene.ue_base_position),
        "room_bounds": list(scene.room_bounds),
        "ap_array": {
            "n_rows": scene.ap_array.n_rows,
            "n_cols": scene.ap_array.n_cols,
            "polarizations": scene.ap_array.polarizations,
            "element_pitch": scene.ap_array.element_pitch,
            "boresight_azimuth_deg": scene.ap_array.boresight_azimuth_deg,
            "boresight_elevation_deg": scene.ap_array.boresight_elevation_deg,
        },
        "blocker": None
        if scene.blocker is None
        else {
            "center": list(scene.blocker.center),
            "radius": scene.blocker.radius,
            "height": scene.blocker.height,
            "loss_db": scene.blocker.loss_db,
        },
        "mpcs": [
            {
                "gain": [mpc.complex_gain.real, mpc.complex_gain.imag],
                "excess_delay": mpc.excess_delay,
                "aoa": list(mpc.aoa),
                "aod": list(mpc.aod),
                "is_los": mpc.is_los,
                "order": mpc.order,
                "pol_weights": list(mpc.pol_weights),
            }
            for mpc in scene.mpcs
        ],
    }


def scene_from_dict(doc: dict) -> Scene:
    try:
        ap_array = ApArray(**doc.get("ap_array", {}))
        blocker_doc = doc.get("blocker")
        blocker = None
        if blocker_doc is not None:
            blocker = Blocker(
                center=tuple(blocker_doc["center"]),
                radius=blocker_doc["radius"],
                height=blocker_doc["height"],
                loss_db=blocker_doc.get("loss_db", 20.0),
            )
        mpcs = tuple(
            Mpc(
                complex_gain=complex(m["gain"][0], m["gain"][1]),
                excess_delay=m["excess_delay"],
                aoa=tuple(m["aoa"]),
                aod=tuple(m["aod"]),
                is_los=m.get("is_los", False),
                order=m.get("order", 0),
                pol_weights=tuple(m.get("pol_weights", (1.0, 0.3))),
            )
            for m in doc["mpcs"]
        )
        return Scene(
            ap_position=tuple(doc["ap_position"]),
            ue_base_position=tuple(doc["ue_base_position"]),
            mpcs=mpcs,
            ap_array=ap_array,
            room_bounds=tuple(doc.get("room_bounds", (6.0, 9.15, 3.0))),
            blocker=blocker,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed scene document: {exc}") from exc


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_dict(json.load(fh))


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(
        json.dumps(scene_to_dict(scene), indent=2) + "\n", encoding="utf-8"
    )


def los_path(ap_position, ue_position, gain: complex = 1.0 + 0.0j) -> Mpc:
    """LOS component with angles and delay derived from the endpoints."""
    ap = np.asarray(ap_position, dtype=np.float64)
    ue = np.asarray(ue_position, dtype=np.float64)
    separation = ap - ue
    distance = float(np.linalg.norm(separation))
    if distance == 0:
        raise ValueError("AP and receiver positions coincide")
    return Mpc(
        complex_gain=gain,
        excess_delay=distance / SPEED_OF_LIGHT,
        aoa=angles_from_vector(separation),
        aod=angles_from_vector(-separation),
        is_los=True,
        order=0,
    )


def random_scene(
    rng: np.random.Generator,
    *,
    n_reflections: tuple[int, int] = (3, 8),
    reflection_loss_db: tuple[float, float] = (3.0, 18.0),
    excess_delay_ns: tuple[float, float] = (4.0, 80.0),
    with_blocker: bool = False,
    ap_array: ApArray | None = None,
    room_bounds: tuple[float, float, float] = (6.0, 9.15, 3.0),
) -> Scene:
    """Draw a plausible indoor scene.

    The AP sits near one short wall facing into the room; the receiver
    stands in the central region.  Reflections arrive from uniform
    azimuths with mild elevations, a few dB below the LOS, and within the
    post-processing delay window.
    """
    if ap_array is None:
        # face the room interior (+y)
        ap_array = ApArray(n_rows=4, n_cols=4, boresight_azimuth_deg=90.0)
    w, l, h = room_bounds
    ap_position = (
        float(rng.uniform(0.5, w - 0.5)),
        float(rng.uniform(0.2, 0.8)),
        float(rng.uniform(1.6, min(2.4, h - 0.2))),
    )
    ue_position = (
        float(rng.uniform(1.0, w - 1.0)),
        float(rng.uniform(2.5, l - 1.0)),
        float(rng.uniform(1.2, 1.8)),
    )
    los = los_path(
        ap_position, ue_position, gain=np.exp(2j * np.pi * rng.uniform())
    )

    mpcs = [los]
    for _ in range(int(rng.integers(n_reflections[0], n_reflections[1] + 1))):
        loss_db = rng.uniform(*reflection_loss_db)
        gain = 10 ** (-loss_db / 20.0) * np.exp(2j * np.pi * rng.uniform())
        mpcs.append(
            Mpc(
                complex_gain=complex(gain),
                excess_delay=los.excess_delay + rng.uniform(*excess_delay_ns) * 1e-9,
                aoa=(float(rng.uniform(0.0, 360.0)), float(rng.uniform(-30.0, 45.0))),
                aod=(
                    float(rng.uniform(60.0, 120.0)),
                    float(rng.uniform(-20.0, 20.0)),
                ),
                is_los=False,
                order=int(rng.integers(1, 3)),
            )
        )

    blocker = None
    if with_blocker:
        ap = np.asarray(ap_position)
        ue = np.asarray(ue_position)
        mid = ue + (ap - ue) * rng.uniform(0.2, 0.5)
        blocker = Blocker(
            center=(float(mid[0]), float(mid[1]), 0.9),
            radius=0.22,
            height=1.8,
            loss_db=20.0,
        )

    return Scene(
        ap_position=ap_position,
        ue_base_position=ue_position,
        mpcs=tuple(mpcs),
        ap_array=ap_array,
        room_bounds=room_bounds,
        blocker=blocker,
    )


def demo_scene(with_blocker: bool = False) -> Scene:
    """Fixed desk-scale demo scene shipped with the repository.

    The receiver starts looking straight at the AP (+x), with one wall
    reflection from the front-right, one from behind-left, and a ceiling
    bounce; the optional blocker stands on the LOS two meters in front of
    the receiver.
    """
    ap_position = (5.5, 4.5, 2.0)
    ue_position = (1.5, 4.5, 1.5)
    los = los_path(ap_position, ue_position)
    mpcs = [
        los,
        # wall reflection arriving from the receiver's front-right
        Mpc(
            complex_gain=0.35 * np.exp(0.7j),
            excess_delay=los.excess_delay + 12e-9,
            aoa=(-15.0, 5.0),
            aod=(165.0, 2.0),
            order=1,
        ),
        # side wall bounce from behind-left
        Mpc(
            complex_gain=0.2 * np.exp(-1.9j),
            excess_delay=los.excess_delay + 31e-9,
            aoa=(150.0, 8.0),
            aod=(200.0, -5.0),
            order=1,
        ),
        # ceiling bounce
        Mpc(
            complex_gain=0.15 * np.exp(2.4j),
            excess_delay=los.excess_delay + 48e-9,
            aoa=(40.0, 40.0),
            aod=(172.0, 15.0),
            order=2,
        ),
    ]
    blocker = (
        Blocker(center=(3.0, 4.5, 0.9), radius=0.22, height=1.8, loss_db=20.0)
        if with_blocker
        else None
    )
    return Scene(
        ap_position=ap_position,
        ue_base_position=ue_position,
        mpcs=tuple(mpcs),
        # AP looks back along -x toward the receiver
        ap_array=ApArray(n_rows=4, n_cols=4, boresight_azimuth_deg=180.0),
        room_bounds=(6.0, 9.15, 3.0),
        blocker=blocker,
    )


def glance_scene(
    rng: np.random.Generator,
    *,
    glance_deg: float = 45.0,
    glance_jitter_deg: float = 5.0,
    back_wall_loss_db: tuple[float, float] = (2.0, 4.0),
    side_wall_loss_db: tuple[float, float] = (5.0, 8.0),
    n_scatter: tuple[int, int] = (5, 10),
    scatter_loss_db: tuple[float, float] = (10.0, 18.0),
) -> tuple[Scene, Pose]:
    """Draw a structured indoor scene together with a "glancing" pose.

    The receiver looks glance_deg away from the AP bearing (left or right
    at random), which puts the LOS on one of the head's diagonals.  Two
    deterministic wall returns accompany it: a strong back-wall bounce
    arriving from the diagonal opposite the glance and a weaker side-wall
    bounce arriving broadside, between them a few dB apart so the three
    strongest arrivals occupy distinct 45-degree sectors.  A weak isotropic
    scatter floor fills the remaining directions.

    Useful for coverage-versus-aperture studies: panel subsets that miss
    the diagonals lean on the wall returns, while subsets that already
    contain them gain only redundant aperture from further panels.
    """
    ap = (5.5, 0.5, 2.0)
    ue = (
        float(rng.uniform(2.0, 4.0)),
        float(rng.uniform(3.0, 6.0)),
        1.6,
    )
    d = np.subtract(ap, ue)
    bearing = float(np.degrees(np.arctan2(d[1], d[0])))
    side = 1.0 if rng.uniform() < 0.5 else -1.0
    yaw = bearing - side * glance_deg + float(
        rng.uniform(-glance_jitter_deg, glance_jitter_deg)
    )
    los = los_path(ap, ue, gain=np.exp(2j * np.pi * rng.uniform()))

    def bounce(loss_db: float, head_az: float, el: float, extra_ns: float) -> Mpc:
        gain = 10 ** (-loss_db / 20.0) * np.exp(2j * np.pi * rng.uniform())
        return Mpc(
            complex_gain=complex(gain),
            excess_delay=los.excess_delay + extra_ns * 1e-9,
            aoa=(float((yaw + head_az) % 360.0), float(el)),
            aod=(float(rng.uniform(60.0, 120.0)), float(rng.uniform(-20.0, 20.0))),
            is_los=False,
            order=1,
        )

    mpcs = [
        los,
        bounce(
            rng.uniform(*back_wall_loss_db),
            -side * 135.0 + rng.uniform(-10.0, 10.0),
            rng.uniform(-5.0, 20.0),
            rng.uniform(8.0, 25.0),
        ),
        bounce(
            rng.uniform(*side_wall_loss_db),
            -side * 90.0 + rng.uniform(-8.0, 8.0),
            rng.uniform(-5.0, 20.0),
            rng.uniform(8.0, 30.0),
        ),
    ]
    for _ in range(int(rng.integers(n_scatter[0], n_scatter[1] + 1))):
        mpcs.append(
            bounce(
                rng.uniform(*scatter_loss_db),
                rng.uniform(0.0, 360.0),
                rng.uniform(-30.0, 45.0),
                rng.uniform(4.0, 80.0),
            )
        )
    scene = Scene(
        ap_position=ap,
        ue_base_position=ue,
        mpcs=tuple(mpcs),
        ap_array=ApArray(n_rows=4, n_cols=4, boresight_azimuth_deg=90.0),
        room_bounds=(6.0, 9.15, 3.0),
        blocker=None,
    )
    pose = Pose(
        position=scene.ue_base_position,
        orientation=Orientation(
            yaw_deg=yaw, pitch_deg=float(rng.uniform(-5.0, 5.0))
        ),
    )
    return scene, pose
