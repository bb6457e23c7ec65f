"""Binary containers for CIR snapshots and eigen-gain grids.

Fixed little-endian layout, 32-bit float storage for channel coefficients
(computation stays in 64-bit), magic-tagged headers, and strict length
checking with byte offsets in every error message.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from hmdchan.eigengain import EigenGainGrid
from hmdchan.geometry import PanelConfig
from hmdchan.tensors import CirSnapshot, MeasurementKey, SCENARIOS

CIR_MAGIC = b"HMDCIR01"
CIR_HEADER = struct.Struct("<8sIIIdIBI")  # magic, rx, tx, tap, spacing, u, s, i

GRID_MAGIC = b"HMDGRD01"
GRID_HEADER = struct.Struct("<8sIIIIBB")  # magic, U, S, I, K, facing, panel mask

_SCENARIO_CODE = {name: code for code, name in enumerate(SCENARIOS)}
_FACING_CODE = {"forward": 0, "backward": 1}
_MAX_ELEMENTS = 2 ** 37  # ~1 TB of payload; anything above is a corrupt header


class ContainerFormatError(ValueError):
    """Raised when a container file violates the on-disk format."""


def _check_magic(found: bytes, expected: bytes, path) -> None:
    if found == expected:
        return
    if found[:6] == expected[:6]:
        raise ContainerFormatError(
            f"{path}: unsupported container version {found[6:].decode(errors='replace')!r} "
            f"(expected {expected[6:].decode()!r}, at byte 0)"
        )
    raise ContainerFormatError(
        f"{path}: bad magic {found!r} at byte 0, expected {expected!r}"
    )


def _read_exact(f, n: int, path, what: str, offset: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise ContainerFormatError(
            f"{path}: truncated {what}: expected {n} bytes, got {len(data)} "
            f"(at byte {offset})"
        )
    return data


def write_cir(path, snapshot: CirSnapshot) -> None:
    """Store one snapshot: 37-byte header, then interleaved (re, im) float32
    pairs in (rx, tx, tap) C order."""
    path = Path(path)
    header = CIR_HEADER.pack(
        CIR_MAGIC,
        snapshot.n_rx,
        snapshot.n_tx,
        snapshot.n_tap,
        snapshot.tap_spacing,
        snapshot.key.u,
        _SCENARIO_CODE[snapshot.key.s],
        snapshot.key.i,
    )
    payload = np.ascontiguousarray(snapshot.tensor).astype("<c8")
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())


def read_cir(path) -> CirSnapshot:
    path = Path(path)
    with open(path, "rb") as f:
        raw = _read_exact(f, CIR_HEADER.size, path, "header", 0)
        magic, n_rx, n_tx, n_tap, spacing, u, s_code, i = CIR_HEADER.unpack(raw)
        _check_magic(magic, CIR_MAGIC, path)
        if min(n_rx, n_tx, n_tap) == 0 or n_rx * n_tx * n_tap > _MAX_ELEMENTS:
            raise ContainerFormatError(
                f"{path}: implausible dimensions {n_rx}x{n_tx}x{n_tap} "
                f"in header (at byte 8)"
            )
        if s_code not in (0, 1):
            raise ContainerFormatError(
                f"{path}: unknown scenario code {s_code} (at byte 32)"
            )
        expected = 8 * n_rx * n_tx * n_tap
        payload = f.read(expected)
        if len(payload) != expected:
            raise ContainerFormatError(
                f"{path}: truncated payload: expected {expected} bytes, got "
                f"{len(payload)} (payload starts at byte {CIR_HEADER.size})"
            )
        trailing = f.read(1)
        if trailing:
            raise ContainerFormatError(
                f"{path}: trailing data after payload "
                f"(at byte {CIR_HEADER.size + expected})"
            )
    tensor = (np.frombuffer(payload, dtype="<c8")
              .reshape(n_rx, n_tx, n_tap)
              .astype(np.complex128))
    key = MeasurementKey(u=u, s=SCENARIOS[s_code], i=i)
    return CirSnapshot(tensor=tensor, tap_spacing=spacing, key=key)


def _panel_mask(config: PanelConfig) -> int:
    mask = 0
    for p in config.panels:
        mask |= 1 << p
    return mask


def _panels_from_mask(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(8) if mask & (1 << i))


def write_grid(path, grid: EigenGainGrid) -> None:
    """Store a gain grid: fixed header, axis label arrays, float64 payload."""
    path = Path(path)
    n_u, n_s, n_i, n_k = grid.values.shape
    header = GRID_HEADER.pack(
        GRID_MAGIC, n_u, n_s, n_i, n_k,
        _FACING_CODE[grid.config.facing], _panel_mask(grid.config),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.asarray(grid.positions, "<u4").tobytes())
        f.write(bytes(_SCENARIO_CODE[s] for s in grid.scenarios))
        f.write(np.asarray(grid.snapshot_indices, "<u4").tobytes())
        f.write(np.ascontiguousarray(grid.values, "<f8").tobytes())


def read_grid(path) -> EigenGainGrid:
    path = Path(path)
    with open(path, "rb") as f:
        raw = _read_exact(f, GRID_HEADER.size, path, "header", 0)
        magic, n_u, n_s, n_i, n_k, facing_code, mask = GRID_HEADER.unpack(raw)
        _check_magic(magic, GRID_MAGIC, path)
        if facing_code not in (0, 1) or mask == 0 or mask > 0xFF:
            raise ContainerFormatError(
                f"{path}: invalid config encoding (at byte 24)"
            )
        if min(n_u, n_s, n_i, n_k) == 0 or n_u * n_s * n_i * n_k > _MAX_ELEMENTS:
            raise ContainerFormatError(
                f"{path}: implausible grid shape {(n_u, n_s, n_i, n_k)} "
                f"(at byte 8)"
            )
        offset = GRID_HEADER.size
        positions = np.frombuffer(
            _read_exact(f, 4 * n_u, path, "position labels", offset), "<u4")
        offset += 4 * n_u
        s_codes = _read_exact(f, n_s, path, "scenario labels", offset)
        if any(c not in (0, 1) for c in s_codes):
            raise ContainerFormatError(
                f"{path}: unknown scenario code in labels (at byte {offset})"
            )
        offset += n_s
        indices = np.frombuffer(
            _read_exact(f, 4 * n_i, path, "snapshot labels", offset), "<u4")
        offset += 4 * n_i
        expected = 8 * n_u * n_s * n_i * n_k
        payload = f.read(expected)
        if len(payload) != expected:
            raise ContainerFormatError(
                f"{path}: truncated payload: expected {expected} bytes, got "
                f"{len(payload)} (payload starts at byte {offset})"
            )
        if f.read(1):
            raise ContainerFormatError(
                f"{path}: trailing data after payload (at byte {offset + expected})"
            )
    values = (np.frombuffer(payload, "<f8")
              .reshape(n_u, n_s, n_i, n_k).copy())
    facing = "forward" if facing_code == 0 else "backward"
    config = PanelConfig(panels=_panels_from_mask(mask), facing=facing)
    return EigenGainGrid(
        values=values,
        config=config,
        positions=tuple(int(p) for p in positions),
        scenarios=tuple(SCENARIOS[c] for c in s_codes),
        snapshot_indices=tuple(int(i) for i in indices),
    )
