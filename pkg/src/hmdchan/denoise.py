"""CIR de-noising: eigenvalue thresholding plus delay-spread windowing.

The dominant squared singular value of each per-tap MIMO matrix is
compared against a threshold estimated from the late-delay region of the
same snapshot, where no propagation paths can exist and the per-tap
matrices are pure noise; taps below the threshold are zeroed, and so is
everything beyond the plausible delay spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hmdchan.tensors import (
    CirSnapshot,
    DEFAULT_TAP_SPACING,
    percentile,
    sweep_dominant_sq_singular_values,
)

DEFAULT_NOISE_REGION = (1.35e-6, 2.7e-6)
DEFAULT_TAU_MAX = 105e-9


@dataclass(frozen=True)
class DenoiseParams:
    """noise_region is an open delay interval (seconds) that must contain
    no paths; tau_max is the largest physically plausible path delay."""

    noise_region: tuple[float, float] = DEFAULT_NOISE_REGION
    threshold_percentile: float = 95.0
    tau_max: float = DEFAULT_TAU_MAX

    def __post_init__(self):
        lo, hi = self.noise_region
        if not 0.0 <= lo < hi:
            raise ValueError(f"noise_region must be an increasing interval, got {self.noise_region}")
        if not 0.0 < self.threshold_percentile <= 100.0:
            raise ValueError("threshold_percentile must lie in (0, 100]")
        if not 0.0 < self.tau_max < lo:
            raise ValueError(
                f"tau_max ({self.tau_max}) must be positive and below the noise region ({lo})"
            )

    @classmethod
    def for_grid(
        cls,
        n_tap: int,
        tap_spacing: float = DEFAULT_TAP_SPACING,
        *,
        threshold_percentile: float = 95.0,
        tau_max: float = DEFAULT_TAU_MAX,
    ) -> "DenoiseParams":
        """Parameters with the noise region scaled to a (shorter) tap grid:
        the second half of the observable delay range."""
        max_delay = n_tap * tap_spacing
        return cls(
            noise_region=(max_delay / 2.0, max_delay),
            threshold_percentile=threshold_percentile,
            tau_max=tau_max,
        )


@dataclass
class DenoiseReport:
    """Bookkeeping for one de-noising pass.

    taps_kept counts taps that are non-zero in the output;
    taps_zeroed_by_window counts taps at or beyond the delay-spread cut;
    taps_zeroed_by_threshold counts the remaining in-window taps that are
    zero in the output.  The three always sum to n_tap.
    """

    lambda_noise: np.ndarray
    threshold: float
    taps_kept: int
    taps_zeroed_by_threshold: int
    taps_zeroed_by_window: int


def delay_eigen_profile(cir: CirSnapshot) -> np.ndarray:
    """Dominant squared singular value of every per-tap MIMO matrix."""
    stack = np.moveaxis(cir.tensor, 2, 0)
    return sweep_dominant_sq_singular_values(stack)


def noise_region_taps(cir: CirSnapshot, params: DenoiseParams) -> np.ndarray:
    """Tap indices whose delay falls strictly inside the noise region."""
    lo, hi = params.noise_region
    delays = np.arange(cir.n_tap) * cir.tap_spacing
    return np.flatnonzero((delays > lo) & (delays < hi))


def window_cut_index(params: DenoiseParams, tap_spacing: float) -> int:
    """First zeroed tap index: floor(tau_max / tap_spacing) (80 at defaults)."""
    return int(math.floor(params.tau_max / tap_spacing))


def denoise(
    cir: CirSnapshot,
    params: DenoiseParams | None = None,
    *,
    threshold: float | None = None,
) -> tuple[CirSnapshot, DenoiseReport]:
    """De-noise one snapshot.

    The threshold is the configured percentile of the noise-region per-tap
    dominant eigenvalues (or the explicit override); taps with a dominant
    eigenvalue strictly below it are zeroed, ties survive.  Taps at or
    beyond the tau_max window cut are zeroed unconditionally.
    """
    if params is None:
        params = DenoiseParams()
    noise_taps = noise_region_taps(cir, params)
    if noise_taps.size == 0:
        raise ValueError(
            f"noise region {params.noise_region} contains no taps on a grid of "
            f"{cir.n_tap} x {cir.tap_spacing} s"
        )

    profile = delay_eigen_profile(cir)
    lambda_noise = profile[noise_taps]
    if threshold is None:
        threshold = percentile(lambda_noise, params.threshold_percentile)

    cut = window_cut_index(params, cir.tap_spacing)
    below = profile < threshold

    tensor = cir.tensor.copy()
    tensor[:, :, below] = 0.0
    tensor[:, :, cut:] = 0.0

    nonzero = np.any(tensor != 0.0, axis=(0, 1))
    taps_kept = int(np.count_nonzero(nonzero))
    taps_zeroed_by_window = cir.n_tap - min(cut, cir.n_tap)
    taps_zeroed_by_threshold = cir.n_tap - taps_kept - taps_zeroed_by_window

    report = DenoiseReport(
        lambda_noise=lambda_noise,
        threshold=float(threshold),
        taps_kept=taps_kept,
        taps_zeroed_by_threshold=taps_zeroed_by_threshold,
        taps_zeroed_by_window=taps_zeroed_by_window,
    )
    return (
        CirSnapshot(tensor=tensor, tap_spacing=cir.tap_spacing, key=cir.key),
        report,
    )
