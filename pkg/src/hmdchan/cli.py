"""Command-line interface.

Subcommands mirror the processing stages: synth (scene -> CIR files),
denoise, gains (CIR files -> gain grid), metrics and report (grids ->
CSVs), and pipeline (everything in one go, driven by a JSON config whose
fields can be overridden by flags: defaults < file < flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from hmdchan.containers import (
    ContainerFormatError,
    read_cir,
    read_grid,
    write_cir,
    write_grid,
)
from hmdchan.denoise import DenoiseParams, denoise
from hmdchan.eigengain import compute_grid, grid_mean_over_subcarriers
from hmdchan.geometry import PanelConfig
from hmdchan.metrics import (
    capacity_tradeoff,
    gain_tradeoff,
    minimal_service_tradeoff,
    rear_headband_profit,
    volatility,
)
from hmdchan.pipeline import (
    DESK_N_TAP,
    PipelineError,
    RunConfig,
    run_config_from_dict,
    run_pipeline,
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
from hmdchan.scenes import demo_scene, load_scene, random_scene, save_scene
from hmdchan.synth import DEFAULT_N_TAP, iter_measurement
from hmdchan.tensors import DEFAULT_TAP_SPACING


def _denoise_params_from_args(args, n_tap: int) -> DenoiseParams:
    if args.noise_region is not None:
        return DenoiseParams(noise_region=tuple(args.noise_region),
                             threshold_percentile=args.percentile,
                             tau_max=args.tau_max)
    if n_tap < DEFAULT_N_TAP:
        return DenoiseParams.for_grid(n_tap, threshold_percentile=args.percentile,
                                      tau_max=args.tau_max)
    return DenoiseParams(threshold_percentile=args.percentile,
                         tau_max=args.tau_max)


def _add_denoise_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--percentile", type=float, default=95.0,
                        help="noise-threshold percentile (default 95)")
    parser.add_argument("--tau-max", type=float, default=105e-9,
                        help="delay-window length in seconds (default 105e-9)")
    parser.add_argument("--noise-region", type=float, nargs=2, default=None,
                        metavar=("LO", "HI"),
                        help="noise delay interval in seconds; default scales "
                             "with the tap grid")


def _cmd_synth(args) -> int:
    if args.scene is not None:
        scene = load_scene(args.scene)
    elif args.random_scene is not None:
        rng = np.random.default_rng(args.random_scene)
        scene = random_scene(rng, with_blocker=args.with_blocker)
    else:
        scene = demo_scene(with_blocker=args.with_blocker)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_scene(scene, out / "scene.json")
    print(out / "scene.json")

    n_tap = DESK_N_TAP if args.desk else DEFAULT_N_TAP
    layout = RunConfig(desk_scale=args.desk).layout
    s_label = "NLOS" if scene.blocker is not None else "LOS"
    for cir in iter_measurement(scene, RunConfig().mobility, args.noise_power,
                                args.seed, layout=layout, n_tap=n_tap,
                                tap_spacing=DEFAULT_TAP_SPACING,
                                u=args.position, s=s_label):
        name = f"cir_u{cir.key.u:02d}_{cir.key.s}_i{cir.key.i:03d}.bin"
        write_cir(out / name, cir)
        print(out / name)
    return 0


def _cmd_denoise(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for path in args.inputs:
        cir = read_cir(path)
        params = _denoise_params_from_args(args, cir.n_tap)
        clean, report = denoise(cir, params)
        reports.append((cir.key.i, report))
        target = out / f"denoised_{Path(path).name}"
        write_cir(target, clean)
        print(target)
    write_denoise_report_csv(out / "denoise_reports.csv", reports)
    print(out / "denoise_reports.csv")
    return 0


def _cmd_gains(args) -> int:
    snapshots = [read_cir(p) for p in args.inputs]
    params = _denoise_params_from_args(args, snapshots[0].n_tap)
    config = PanelConfig.forward(args.p) if args.facing == "forward" \
        else PanelConfig.backward(args.p)
    grid = compute_grid(snapshots, config, params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_grid(out, grid)
    print(out)
    if args.csv is not None:
        write_mean_gain_csv(args.csv, [grid])
        print(args.csv)
    return 0


def _load_grid_family(paths):
    """Group grid files by configuration; returns (grids, reference)."""
    grids = {}
    for path in paths:
        grid = read_grid(path)
        key = (grid.config.facing, grid.config.panels)
        if key in grids:
            raise ValueError(f"duplicate grid for config {grid.config.label}")
        grids[key] = grid
    reference = grids.get(("forward", tuple(range(8))))
    if reference is None:
        raise ValueError("no full 8-panel forward grid among inputs; "
                         "metrics need the reference configuration")
    return grids, reference


def _mirror_of(grids, grid):
    mirrored = tuple(sorted((i + 4) % 8 for i in grid.config.panels))
    for facing in ("backward", "forward"):
        other = grids.get((facing, mirrored))
        if other is not None:
            return other
    return None


def _metric_bundles(paths):
    grids, reference = _load_grid_family(paths)
    ref_means = grid_mean_over_subcarriers(reference).ravel()
    forward_grids = sorted(
        (g for (facing, _), g in grids.items() if facing == "forward"),
        key=lambda g: (g.config.p, g.config.panels),
    )
    counts, gain_list, vol_list, service_list, cap_list = [], [], [], [], []
    rear_counts, rear_list = [], []
    for grid in forward_grids:
        counts.append(grid.config.p)
        gain_list.append(gain_tradeoff(grid, reference))
        vol_list.append(volatility(grid))
        service_list.append(minimal_service_tradeoff(
            grid_mean_over_subcarriers(grid).ravel(), ref_means,
            config_label=grid.config.label,
            reference_label=reference.config.label))
        cap_list.append(capacity_tradeoff(grid, reference))
        mirror = _mirror_of(grids, grid)
        if mirror is not None:
            rear_counts.append(grid.config.p)
            rear_list.append(rear_headband_profit(mirror, grid))
    return counts, gain_list, vol_list, service_list, cap_list, \
        rear_counts, rear_list


def _cmd_metrics(args) -> int:
    counts, gain_list, vol_list, service_list, cap_list, _, rear_list = \
        _metric_bundles(args.grids)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_gain_tradeoff_csv(out / "gain_tradeoff.csv", gain_list)
    write_volatility_csv(out / "volatility.csv", vol_list)
    write_minimal_service_csv(out / "minimal_service.csv", service_list)
    write_capacity_csv(out / "capacity_tradeoff.csv", cap_list)
    write_rear_headband_csv(out / "rear_headband.csv", rear_list)
    for name in ("gain_tradeoff", "volatility", "minimal_service",
                 "capacity_tradeoff", "rear_headband"):
        print(out / f"{name}.csv")
    return 0


def _cmd_report(args) -> int:
    counts, gain_list, vol_list, _, cap_list, rear_counts, rear_list = \
        _metric_bundles(args.grids)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_gain_distribution_csv(out / "fig4_gain_ratio_distribution.csv",
                                gain_list, counts)
    write_volatility_scatter_csv(out / "fig5_volatility_scatter.csv",
                                 vol_list, counts)
    write_capacity_cdf_csv(out / "fig6_capacity_cdf.csv", cap_list, counts)
    write_rear_histogram_csv(out / "fig7_rear_histogram.csv", rear_list,
                             rear_counts)
    for name in ("fig4_gain_ratio_distribution", "fig5_volatility_scatter",
                 "fig6_capacity_cdf", "fig7_rear_histogram"):
        print(out / f"{name}.csv")
    return 0


def _cmd_pipeline(args) -> int:
    data = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    if args.scene is not None:
        data["scene"] = args.scene
    if args.out is not None:
        data["output_dir"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.noise_power is not None:
        data["noise_power"] = args.noise_power
    if args.panels is not None:
        data["panel_counts"] = [int(p) for p in args.panels.split(",")]
    if args.desk is not None:
        data["desk_scale"] = args.desk
    if args.position is not None:
        data["position"] = args.position
    config = run_config_from_dict(data)
    artifacts = run_pipeline(config)
    for name in sorted(artifacts):
        print(artifacts[name])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmdchan",
        description="Head-mounted-array channel analysis: synthesize CIRs, "
                    "de-noise, extract per-subcarrier dominant-eigenmode "
                    "gains, and evaluate panel-configuration metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render CIR snapshot files for a scene")
    p.add_argument("--scene", default=None, help="scene JSON path")
    p.add_argument("--random-scene", type=int, default=None, metavar="SEED",
                   help="draw a random scene with this seed instead")
    p.add_argument("--with-blocker", action="store_true",
                   help="add the LOS blocker (NLOS scenario)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--noise-power", type=float, default=0.0)
    p.add_argument("--position", type=int, default=0, help="position index u")
    p.add_argument("--desk", action=argparse.BooleanOptionalAction,
                   default=True,
                   help="desk-scale dimensions (default); --no-desk for full")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("denoise", help="de-noise CIR container files")
    p.add_argument("inputs", nargs="+", help="CIR container paths")
    p.add_argument("--out", required=True, help="output directory")
    _add_denoise_flags(p)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("gains", help="compute a panel-config gain grid")
    p.add_argument("inputs", nargs="+", help="CIR container paths")
    p.add_argument("--p", type=int, required=True, choices=range(1, 9),
                   help="panel count")
    p.add_argument("--facing", choices=("forward", "backward"),
                   default="forward")
    p.add_argument("--out", required=True, help="grid output file")
    p.add_argument("--csv", default=None, help="optional mean-gain CSV path")
    _add_denoise_flags(p)
    p.set_defaults(func=_cmd_gains)

    p = sub.add_parser("metrics", help="metric CSVs from gain-grid files")
    p.add_argument("grids", nargs="+", help="grid container paths "
                                            "(must include the 8-panel forward grid)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("report", help="plot-ready CSVs from gain-grid files")
    p.add_argument("grids", nargs="+", help="grid container paths")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pipeline", help="scene to metrics in one command")
    p.add_argument("--config", default=None, help="run-config JSON path")
    p.add_argument("--scene", default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise-power", type=float, default=None)
    p.add_argument("--panels", default=None,
                   help="comma-separated panel counts, e.g. 1,2,4,8")
    p.add_argument("--position", type=int, default=None)
    p.add_argument("--desk", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="desk-scale dimensions; --no-desk for full scale")
    p.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ContainerFormatError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
