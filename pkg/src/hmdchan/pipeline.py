"""End-to-end run orchestration: scene -> snapshots -> de-noising ->
gain grids -> metrics -> CSV/binary artifacts.

Snapshots stream one at a time so full-scale tensors never accumulate;
each snapshot is de-noised once with the full receive array and the panel
configurations are evaluated on the shared de-noised data.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from hmdchan.containers import write_grid
from hmdchan.denoise import DenoiseParams, denoise
from hmdchan.eigengain import EigenGainGrid, grid_mean_over_subcarriers, subcarrier_gain_slice
from hmdchan.geometry import DESK_LAYOUT, ArrayLayout, MobilityPattern, PanelConfig
from hmdchan.metrics import (
    capacity_tradeoff,
    gain_tradeoff,
    minimal_service_tradeoff,
    rear_headband_profit,
    volatility,
)
from hmdchan.reports import (
    write_capacity_cdf_csv,
    write_capacity_csv,
    write_denoise_report_csv,
    write_gain_distribution_csv,
    write_gain_tradeoff_csv,
    write_mean_gain_csv,
    write_minimal_service_csv,
    write_rear_headband_csv,
    write_rear_histogram_csv,
    write_volatility_csv,
    write_volatility_scatter_csv,
)
from hmdchan.scenes import demo_scene, load_scene
from hmdchan.synth import DEFAULT_N_TAP, iter_measurement
from hmdchan.tensors import DEFAULT_TAP_SPACING

DESK_N_TAP = 256


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message carries the stage tag."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


@dataclass
class RunConfig:
    """Everything a pipeline run depends on; JSON-serializable."""

    scene_path: str | None = None  # None -> built-in demo scene
    output_dir: str = "out"
    seed: int = 0
    noise_power: float = 1e-9
    panel_counts: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8)
    desk_scale: bool = True
    position: int = 0
    mobility: MobilityPattern = field(default_factory=MobilityPattern)
    denoise: DenoiseParams | None = None  # None -> scale-appropriate default

    def __post_init__(self):
        self.panel_counts = tuple(int(p) for p in self.panel_counts)
        if not self.panel_counts:
            raise ValueError("panel_counts must not be empty")
        if any(p < 1 or p > 8 for p in self.panel_counts):
            raise ValueError(f"panel counts must lie in 1..8, got {self.panel_counts}")
        if len(set(self.panel_counts)) != len(self.panel_counts):
            raise ValueError("panel_counts contains duplicates")
        if self.scene_path is not None:
            self.scene_path = str(self.scene_path)  # accept PathLike
        self.output_dir = str(self.output_dir)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.noise_power < 0:
            raise ValueError("noise_power must be non-negative")
        if self.position < 0:
            raise ValueError("position must be non-negative")

    @property
    def n_tap(self) -> int:
        return DESK_N_TAP if self.desk_scale else DEFAULT_N_TAP

    @property
    def layout(self) -> ArrayLayout:
        return DESK_LAYOUT if self.desk_scale else ArrayLayout()

    def denoise_params(self) -> DenoiseParams:
        if self.denoise is not None:
            return self.denoise
        if self.desk_scale:
            return DenoiseParams.for_grid(self.n_tap)
        return DenoiseParams()

    def to_dict(self) -> dict:
        # output_dir is deliberately omitted: the resolved dump sits inside
        # that directory, and recording it would make otherwise identical
        # runs differ byte-wise.
        d = {
            "scene": self.scene_path,
            "seed": self.seed,
            "noise_power": self.noise_power,
            "panel_counts": list(self.panel_counts),
            "desk_scale": self.desk_scale,
            "position": self.position,
            "mobility": {
                "segment_durations": list(self.mobility.segment_durations),
                "segment_deltas": [list(d) for d in self.mobility.segment_deltas],
                "rotation_center_offset": self.mobility.rotation_center_offset,
                "snapshot_rate": self.mobility.snapshot_rate,
            },
        }
        if self.denoise is not None:
            d["denoise"] = {
                "noise_region": list(self.denoise.noise_region),
                "threshold_percentile": self.denoise.threshold_percentile,
                "tau_max": self.denoise.tau_max,
            }
        return d


def run_config_from_dict(data: dict) -> RunConfig:
    try:
        kwargs = {}
        if "scene" in data:
            kwargs["scene_path"] = data["scene"]
        for name in ("output_dir", "seed", "noise_power", "desk_scale",
                     "position"):
            if name in data:
                kwargs[name] = data[name]
        if "panel_counts" in data:
            kwargs["panel_counts"] = tuple(data["panel_counts"])
        if "mobility" in data:
            m = data["mobility"]
            kwargs["mobility"] = MobilityPattern(
                segment_durations=tuple(m.get("segment_durations", (3.0, 15.0, 15.0))),
                segment_deltas=tuple(tuple(d) for d in m.get(
                    "segment_deltas", ((30.0, 0.0), (0.0, 30.0), (30.0, 0.0)))),
                rotation_center_offset=m.get("rotation_center_offset", 0.25),
                snapshot_rate=m.get("snapshot_rate", 1.0),
            )
        if "denoise" in data and data["denoise"] is not None:
            d = data["denoise"]
            kwargs["denoise"] = DenoiseParams(
                noise_region=tuple(d["noise_region"]),
                threshold_percentile=d.get("threshold_percentile", 95.0),
                tau_max=d.get("tau_max", 105e-9),
            )
        return RunConfig(**kwargs)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed run config: {exc}") from exc


def load_run_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return run_config_from_dict(json.load(fh))


def _evaluation_configs(panel_counts) -> list[PanelConfig]:
    configs = [PanelConfig.forward(8)]
    for p in panel_counts:
        for cfg in (PanelConfig.forward(p), PanelConfig.backward(p)):
            if cfg not in configs:
                configs.append(cfg)
    return configs


def run_pipeline(config: RunConfig) -> dict[str, Path]:
    """Execute one full run; returns artifact name -> path.

    Any failure removes files already written and surfaces as a
    PipelineError tagged with the failed stage.
    """
    out_dir = Path(config.output_dir)
    created: list[Path] = []

    def emit(name: str, writer, *args) -> Path:
        path = out_dir / name
        writer(path, *args)
        created.append(path)
        return path

    try:
        with _stage("scene"):
            if config.scene_path is not None:
                scene = load_scene(config.scene_path)
            else:
                scene = demo_scene()
            s_label = "NLOS" if scene.blocker is not None else "LOS"

        params = config.denoise_params()
        configs = _evaluation_configs(config.panel_counts)
        slice_cache: dict[tuple[int, ...], list[np.ndarray]] = {}
        reports = []

        snapshots = iter_measurement(
            scene, config.mobility, config.noise_power, config.seed,
            layout=config.layout, n_tap=config.n_tap,
            tap_spacing=DEFAULT_TAP_SPACING, u=config.position, s=s_label,
        )
        while True:
            with _stage("synth"):
                cir = next(snapshots, None)
            if cir is None:
                break
            with _stage("denoise"):
                clean, report = denoise(cir, params)
                reports.append((cir.key.i, report))
            del cir
            with _stage("gains"):
                for cfg in configs:
                    if cfg.panels not in slice_cache:
                        slice_cache[cfg.panels] = []
                seen = set()
                for cfg in configs:
                    if cfg.panels in seen:
                        continue
                    seen.add(cfg.panels)
                    slice_cache[cfg.panels].append(
                        subcarrier_gain_slice(clean, cfg, layout=config.layout))
            del clean

        with _stage("gains"):
            n_i = len(reports)
            grids: dict[PanelConfig, EigenGainGrid] = {}
            for cfg in configs:
                values = np.stack(slice_cache[cfg.panels])[None, None]
                grids[cfg] = EigenGainGrid(
                    values=values, config=cfg,
                    positions=(config.position,), scenarios=(s_label,),
                    snapshot_indices=tuple(range(n_i)),
                )

        with _stage("metrics"):
            reference = grids[PanelConfig.forward(8)]
            ref_means = grid_mean_over_subcarriers(reference).ravel()
            gain_list, vol_list, service_list, cap_list, rear_list = [], [], [], [], []
            for p in config.panel_counts:
                fwd = grids[PanelConfig.forward(p)]
                bwd = grids[PanelConfig.backward(p)]
                gain_list.append(gain_tradeoff(fwd, reference))
                vol_list.append(volatility(fwd))
                service_list.append(minimal_service_tradeoff(
                    grid_mean_over_subcarriers(fwd).ravel(), ref_means,
                    config_label=fwd.config.label,
                    reference_label=reference.config.label))
                cap_list.append(capacity_tradeoff(fwd, reference))
                rear_list.append(rear_headband_profit(bwd, fwd))

        with _stage("report"):
            out_dir.mkdir(parents=True, exist_ok=True)
            artifacts = {}
            resolved = out_dir / "run_config.json"
            resolved.write_text(json.dumps(config.to_dict(), indent=2) + "\n",
                                encoding="utf-8")
            created.append(resolved)
            artifacts["run_config"] = resolved
            for cfg in configs:
                name = f"gains_{cfg.label}.bin"
                artifacts[name] = emit(name, write_grid, grids[cfg])
            artifacts["denoise_reports"] = emit(
                "denoise_reports.csv", write_denoise_report_csv, reports)
            artifacts["mean_gains"] = emit(
                "mean_gains.csv", write_mean_gain_csv,
                [grids[c] for c in configs])
            artifacts["gain_tradeoff"] = emit(
                "gain_tradeoff.csv", write_gain_tradeoff_csv, gain_list)
            artifacts["volatility"] = emit(
                "volatility.csv", write_volatility_csv, vol_list)
            artifacts["minimal_service"] = emit(
                "minimal_service.csv", write_minimal_service_csv, service_list)
            artifacts["capacity_tradeoff"] = emit(
                "capacity_tradeoff.csv", write_capacity_csv, cap_list)
            artifacts["rear_headband"] = emit(
                "rear_headband.csv", write_rear_headband_csv, rear_list)

            counts = list(config.panel_counts)
            artifacts["fig4"] = emit("fig4_gain_ratio_distribution.csv",
                                     write_gain_distribution_csv, gain_list, counts)
            artifacts["fig5"] = emit("fig5_volatility_scatter.csv",
                                     write_volatility_scatter_csv, vol_list, counts)
            artifacts["fig6"] = emit("fig6_capacity_cdf.csv",
                                     write_capacity_cdf_csv, cap_list, counts)
            artifacts["fig7"] = emit("fig7_rear_histogram.csv",
                                     write_rear_histogram_csv, rear_list, counts)
        return artifacts
    except PipelineError:
        for path in created:
            try:
                path.unlink()
            except OSError:
                pass
        raise
