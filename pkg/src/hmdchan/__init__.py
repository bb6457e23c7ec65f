"""Multi-panel mmWave head-mounted receiver channel analysis toolkit."""

from hmdchan.containers import read_cir, read_grid, write_cir, write_grid
from hmdchan.denoise import DenoiseParams, DenoiseReport, denoise
from hmdchan.eigengain import (
    EigenGainGrid,
    compute_grid,
    grid_mean_over_subcarriers,
    subcarrier_gain_slice,
)
from hmdchan.geometry import (
    DESK_LAYOUT,
    ArrayLayout,
    MobilityPattern,
    PanelConfig,
    Pose,
    orientation_at,
    rows_for_config,
    ue_pose_at,
)
from hmdchan.metrics import (
    capacity_tradeoff,
    gain_tradeoff,
    minimal_service_tradeoff,
    rear_headband_profit,
    volatility,
)
from hmdchan.pipeline import PipelineError, RunConfig, run_pipeline
from hmdchan.scenes import (
    demo_scene,
    glance_scene,
    load_scene,
    random_scene,
    save_scene,
)
from hmdchan.synth import (
    ApArray,
    Blocker,
    Mpc,
    Scene,
    iter_measurement,
    synthesize_measurement,
    synthesize_snapshot,
)
from hmdchan.tensors import (
    CirSnapshot,
    CtfSnapshot,
    MeasurementKey,
    dominant_sq_singular_value,
    dominant_sq_singular_values,
    fft_delay_axis,
    percentile,
    sweep_dominant_sq_singular_values,
)

__version__ = "0.1.0"

__all__ = [
    "ApArray",
    "ArrayLayout",
    "Blocker",
    "CirSnapshot",
    "CtfSnapshot",
    "DESK_LAYOUT",
    "DenoiseParams",
    "DenoiseReport",
    "EigenGainGrid",
    "MeasurementKey",
    "MobilityPattern",
    "Mpc",
    "PanelConfig",
    "PipelineError",
    "Pose",
    "RunConfig",
    "Scene",
    "capacity_tradeoff",
    "compute_grid",
    "demo_scene",
    "denoise",
    "dominant_sq_singular_value",
    "dominant_sq_singular_values",
    "fft_delay_axis",
    "gain_tradeoff",
    "glance_scene",
    "grid_mean_over_subcarriers",
    "iter_measurement",
    "load_scene",
    "minimal_service_tradeoff",
    "orientation_at",
    "percentile",
    "random_scene",
    "read_cir",
    "read_grid",
    "rear_headband_profit",
    "rows_for_config",
    "run_pipeline",
    "save_scene",
    "subcarrier_gain_slice",
    "sweep_dominant_sq_singular_values",
    "synthesize_measurement",
    "synthesize_snapshot",
    "ue_pose_at",
    "volatility",
    "write_cir",
    "write_grid",
    "__version__",
]
