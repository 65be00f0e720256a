"""Command-line front end.

Subcommands: synth, reorganize, audit, lrtc, report. Exit codes are a
stable contract: 0 success, 2 config error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .config import PRESETS, load_config
from .design import save_dataset, template_by_name
from .errors import ConfigError, NumericalError, RecordingError
from .recordings import load_recording, save_recording

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakaudit",
        description="Audit temporal-autocorrelation leakage in block-design decoding",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", choices=sorted(PRESETS), help="named experiment grid")
        p.add_argument("--out", help="output directory (overrides config out_dir)")
        p.add_argument("--seed", type=int, action="append", default=None,
                       help="replication seed; repeatable, overrides config seeds")
        p.add_argument("--jobs", type=int, default=None, help="concurrent seed workers")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_synth = sub.add_parser("synth", help="write surrogate recordings")
    common(p_synth)
    p_synth.add_argument("--duration", type=float, default=None, help="seconds per recording")

    p_reorg = sub.add_parser("reorganize", help="recording -> labeled dataset directory")
    p_reorg.add_argument("recording", help="raw recording file")
    p_reorg.add_argument("--template", required=True,
                         choices=["cvpr_like", "deap_like", "kul_like"])
    p_reorg.add_argument("--out", required=True, help="dataset output directory")
    p_reorg.add_argument("--subject", type=int, default=0)
    p_reorg.add_argument("--seed", type=int, default=0)

    p_audit = sub.add_parser("audit", help="run the audit grid and emit reports")
    common(p_audit)

    p_lrtc = sub.add_parser("lrtc", help="long-range temporal correlation map")
    common(p_lrtc)

    p_report = sub.add_parser("report", help="summarize report JSON files")
    p_report.add_argument("reports", nargs="+", help="report JSON paths")
    p_report.add_argument("--out", help="directory for merged outputs")
    p_report.add_argument("--warn-threshold", type=float, default=10.0,
                          help="accuracy-point gap that triggers a leakage warning")
    p_report.add_argument("--no-figures", action="store_true")
    return parser


def _overrides_from_args(args) -> dict:
    overrides: dict = {}
    if args.out:
        overrides["out_dir"] = args.out
    if args.seed:
        overrides["seeds"] = args.seed
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
    return overrides


def cmd_synth(args) -> int:
    from .experiments.pipeline import spec_for_template

    cfg = load_config(args.config, args.preset, _overrides_from_args(args))
    os.makedirs(cfg.out_dir, exist_ok=True)
    from dataclasses import replace

    from .signals import synth

    written = []
    for seed in cfg.seeds:
        spec = cfg.surrogate
        if args.duration is not None:
            if args.duration <= 0:
                raise ConfigError(f"--duration must be positive, got {args.duration}")
            fs = spec.fs if spec.fs > 1 else 128.0
            spec = replace(spec, duration_s=args.duration, fs=fs, seed=seed)
        elif cfg.templates:
            template = template_by_name(cfg.templates[0], seed=cfg.class_map_seed)
            spec = spec_for_template(spec, template, seed)
        elif spec.duration_s > 1 and spec.fs > 1:
            spec = replace(spec, seed=seed)
        else:
            raise ConfigError("synth needs --duration, a template, or a full surrogate spec")
        series = synth(spec)
        path = os.path.join(cfg.out_dir, f"surrogate_{spec.kind}_seed{seed}.rec")
        save_recording(series, path)
        written.append(path)
        print(
            f"wrote {path}: {series.channel_count} ch x {series.duration_s:.1f} s "
            f"@ {series.fs:g} Hz"
        )
    return EXIT_OK


def cmd_reorganize(args) -> int:
    series = load_recording(args.recording)
    template = template_by_name(args.template)
    from .design import reorganize

    dataset = reorganize(series, template, subject_id=args.subject, seed=args.seed)
    save_dataset(dataset, args.out)
    counts = {}
    for s in dataset.samples:
        counts[s.class_id] = counts.get(s.class_id, 0) + 1
    print(
        f"wrote {args.out}: {len(dataset)} samples, {template.n_domains} domains, "
        f"class counts {dict(sorted(counts.items()))}"
    )
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = load_config(args.config, args.preset, _overrides_from_args(args))
    if not cfg.tasks and not cfg.subjects_val:
        raise ConfigError("audit needs at least one task (tasks=[...] or subjects_val=[...])")
    if not cfg.templates:
        raise ConfigError("audit needs at least one template")
    from .experiments.audit import run_audit
    from .experiments.report import write_cells_csv, write_grid_csvs

    report = run_audit(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    json_path = os.path.join(cfg.out_dir, "report.json")
    report.save(json_path)
    write_cells_csv(report, os.path.join(cfg.out_dir, "cells.csv"))
    grid_paths = write_grid_csvs(report, cfg.out_dir)
    print(f"wrote {json_path}, cells.csv, {len(grid_paths)} grid CSVs")
    if cfg.figures:
        from .figures import accuracy_summary_figure

        fig_path = accuracy_summary_figure(
            report.summarize(), os.path.join(cfg.out_dir, "accuracy_summary.png")
        )
        if fig_path:
            print(f"wrote {fig_path}")
    _print_summary(report, warn_threshold=10.0)
    return EXIT_OK


def cmd_lrtc(args) -> int:
    cfg = load_config(args.config, args.preset, _overrides_from_args(args))
    from dataclasses import replace as dreplace

    from .lrtc import WaveletSpec, lrtc_map, lrtc_significance, save_acf_csvs
    from .signals import synth

    spec = WaveletSpec.from_dict(cfg.wavelet)
    recordings = {}
    if cfg.recordings:
        for i, path in enumerate(cfg.recordings):
            recordings[i] = [load_recording(path)]
    else:
        surrogate = cfg.surrogate
        if surrogate.duration_s <= 1 or surrogate.fs <= 1:
            need = 2.0 * max(spec.lags_s) * cfg.n_segments
            surrogate = dreplace(
                surrogate, fs=spec.analysis_fs, duration_s=float(need)
            )
        for i, seed in enumerate(cfg.seeds):
            recordings[i] = [synth(dreplace(surrogate, seed=seed))]
    matrix = lrtc_map(recordings, spec, n_segments=cfg.n_segments)
    if matrix.n_units >= 2:
        lrtc_significance(matrix, q=0.01)
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = save_acf_csvs(matrix, cfg.out_dir)
    print(f"wrote {len(paths)} files under {cfg.out_dir} "
          f"(matrix {matrix.values.shape[0]} freqs x {matrix.values.shape[1]} lags, "
          f"{matrix.n_units} units)")
    for note in matrix.notes:
        print(f"note: {note}")
    if cfg.figures:
        from .figures import acf_heatmap_figure

        print(f"wrote {acf_heatmap_figure(matrix, os.path.join(cfg.out_dir, 'lrtc_map.png'))}")
    return EXIT_OK


def _stars(p: float) -> str:
    if not (p == p):  # NaN
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "n.s."


def _print_summary(report, warn_threshold: float) -> list[str]:
    rows = report.summarize()
    warnings = []
    print(f"{'task':<14}{'template':<11}{'split':<28}{'band':<10}"
          f"{'accuracy':>16}{'chance':>8}  signif")
    for r in rows:
        print(
            f"{r.task:<14}{r.template:<11}{r.split:<28}{r.band:<10}"
            f"{r.mean_pct:>9.2f}±{r.sem_pct:<6.2f}{r.chance_pct:>8.2f}  {_stars(r.p_adjusted)}"
        )
    by_key: dict[tuple, dict[str, float]] = {}
    for r in rows:
        split_family = "lso" if r.split.startswith("leave_samples_out") else (
            "ldo" if r.split.startswith("leave_domains_out") else None
        )
        if r.task == "tlc_eeg_wodo":
            split_family = "ldo"
        task_family = "tlc" if r.task in ("tlc_eeg", "tlc_eeg_wodo") else r.task
        if split_family:
            by_key.setdefault((task_family, r.template, r.band), {})[split_family] = r.mean_pct
    for (task, template, band), pair in sorted(by_key.items()):
        if "lso" in pair and "ldo" in pair and pair["lso"] - pair["ldo"] > warn_threshold:
            msg = (
                f"LEAKAGE WARNING: {task} on {template} ({band}): leave-samples-out "
                f"{pair['lso']:.1f}% exceeds leave-domains-out {pair['ldo']:.1f}% by "
                f"{pair['lso'] - pair['ldo']:.1f} points"
            )
            warnings.append(msg)
            print(msg)
    return warnings


def cmd_report(args) -> int:
    from .experiments.report import AuditReport, merge_reports, write_cells_csv, write_grid_csvs

    reports = [AuditReport.load(path) for path in args.reports]
    merged = merge_reports(reports) if len(reports) > 1 else reports[0]
    if len(reports) > 1:
        print(f"merged {len(reports)} reports: {len(merged.cells)} cells, "
              f"{merged.meta.get('n_subjects', '?')} runs")
    _print_summary(merged, warn_threshold=args.warn_threshold)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        merged.save(os.path.join(args.out, "merged_report.json"))
        write_cells_csv(merged, os.path.join(args.out, "cells.csv"))
        write_grid_csvs(merged, args.out)
        if not args.no_figures:
            from .figures import accuracy_summary_figure

            accuracy_summary_figure(
                merged.summarize(), os.path.join(args.out, "accuracy_summary.png")
            )
        print(f"wrote merged outputs under {args.out}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "reorganize": cmd_reorganize,
    "audit": cmd_audit,
    "lrtc": cmd_lrtc,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RecordingError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
