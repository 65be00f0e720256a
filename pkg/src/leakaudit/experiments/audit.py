"""End-to-end audit orchestration over (seed x subject x template x band).

Cells are independent pure computations; the report assembly is a
single-owner reduction at the end, so seeds may be fanned out to worker
threads without changing any result.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .. import splits as splitmod
from ..design import _template_from_json, template_by_name
from ..errors import ConfigError
from ..neural import SimpleCnn, SimpleCnnConfig, TrainConfig, accuracy_pct, predict_logits, train
from ..recordings import load_recording
from .pipeline import build_dataset, build_dataset_from_recording, subject_seed
from .report import AuditReport, ReportCell, make_meta
from .tasks import banded_samples, run_band_audit, run_retrieval, run_zero_shot


def _dataset_for(cfg, template, subject: int, seed: int):
    s_seed = subject_seed(seed, subject)
    if cfg.recordings:
        series = load_recording(cfg.recordings[subject % len(cfg.recordings)])
        return build_dataset_from_recording(series, template, subject_id=subject, seed=s_seed)
    return build_dataset(
        cfg.surrogate,
        template,
        subject_id=subject,
        seed=s_seed,
        signature_strength=cfg.signature_strength,
        signature_kwargs=cfg.signature,
    )


def _is_identity_design(template) -> bool:
    return template.n_classes == template.n_domains and all(
        template.class_map[d] == d for d in range(template.n_domains)
    )


def run_tlc_lsubjo(
    datasets: list,
    val_strategy: str,
    train_config: TrainConfig,
    split_seed: int = 0,
    fold_ids: list[int] | None = None,
    band: str = "full",
) -> list[ReportCell]:
    """Cross-subject class classification: leave-subjects-out folds.

    Reports train/validation/test accuracy per fold (the three rows of
    the cross-subject table).
    """
    plans = splitmod.leave_subjects_out(datasets, val_strategy, seed=split_seed)
    if fold_ids is not None:
        plans = [p for p in plans if p.fold_id in set(fold_ids)]
    stacked = [banded_samples(ds, band) for ds in datasets]
    offsets = {}
    total = 0
    for ds, x in zip(datasets, stacked):
        offsets[ds.subject_id] = total
        total += len(x)
    x_all = np.concatenate(stacked, axis=0)
    labels = np.concatenate([ds.class_ids for ds in datasets])
    n_classes = int(np.unique(labels).size)
    template = datasets[0].template
    cells = []
    for plan in plans:
        flat = {}
        for name, pairs in plan.partitions().items():
            pairs = np.asarray(pairs)
            flat[name] = np.array(
                [offsets[int(s)] + int(i) for s, i in pairs], dtype=np.int64
            )
        flat_plan = splitmod.SplitPlan(
            strategy=plan.strategy, seed=plan.seed, fold_id=plan.fold_id,
            train=flat["train"], val=flat["val"], test=flat["test"], note=plan.note,
        )
        sample = datasets[0].samples[0].data
        model = SimpleCnn(
            SimpleCnnConfig.for_samples(
                channels=sample.shape[0], timepoints=sample.shape[1],
                fs=template.target_fs, n_outputs=n_classes,
            )
        )
        result = train(model, x_all, labels, flat_plan, "cross_entropy", train_config)
        extras = {}
        for name, idx in flat_plan.partitions().items():
            logits = predict_logits(model, result.params, x_all[idx])
            extras[f"{name}_acc_pct"] = accuracy_pct(logits, labels[idx])
        cells.append(
            ReportCell(
                task="tlc_eeg",
                template=template.name,
                split=plan.strategy,
                band=band,
                subject=-1,
                seed=train_config.seed,
                fold=plan.fold_id,
                accuracy_pct=extras["test_acc_pct"],
                chance_pct=100.0 / n_classes,
                n_test=int(flat_plan.test.size),
                note=plan.note,
                extras=extras,
            )
        )
    return cells


def _run_seed(cfg, seed: int) -> list[ReportCell]:
    cells: list[ReportCell] = []
    train_cfg = replace(cfg.train, seed=seed)
    for template_name in cfg.templates:
        if isinstance(template_name, dict):
            template = _template_from_json(template_name)
        else:
            template = template_by_name(
                template_name, seed=cfg.class_map_seed, class_map=cfg.class_map_override
            )
        datasets = [
            _dataset_for(cfg, template, subject, seed) for subject in range(cfg.n_subjects)
        ]
        classifier_tasks = [t for t in cfg.tasks if t in ("dlc", "tlc_df", "tlc_eeg", "tlc_eeg_wodo")]
        for dataset in datasets:
            s_seed = subject_seed(seed, dataset.subject_id)
            cell_cfg = replace(train_cfg, seed=s_seed)
            if classifier_tasks:
                cells.extend(
                    run_band_audit(
                        dataset, cfg.bands, classifier_tasks, cell_cfg,
                        split_seed=s_seed, max_folds=cfg.max_folds,
                    )
                )
            if "zero_shot" in cfg.tasks and _is_identity_design(template):
                for mode in cfg.zero_shot.get("modes", ["first_six", "random"]):
                    cells.append(
                        run_zero_shot(
                            dataset, mode, cell_cfg,
                            n_test_classes=cfg.zero_shot.get("n_test_classes", 6),
                            split_seed=s_seed,
                        ).cell
                    )
            if "retrieval" in cfg.tasks and _is_identity_design(template):
                plan = splitmod.leave_samples_out(dataset, seed=s_seed)
                for loss in cfg.retrieval.get("losses", ["cosine", "infonce"]):
                    cells.append(
                        run_retrieval(
                            dataset, plan, loss, cell_cfg,
                            bank_seed=cfg.retrieval.get("bank_seed", 0),
                            embedding_dim=cfg.retrieval.get("embedding_dim", 768),
                        ).cell
                    )
        if cfg.subjects_val and cfg.n_subjects >= 2:
            for val_strategy in cfg.subjects_val:
                cells.extend(
                    run_tlc_lsubjo(
                        datasets, val_strategy, train_cfg,
                        split_seed=seed, fold_ids=cfg.lsubjo_folds, band="full",
                    )
                )
    return cells


def run_audit(cfg) -> AuditReport:
    """Run the configured grid and assemble the report."""
    report = AuditReport(meta=make_meta(cfg.raw, cfg.seeds))
    if cfg.jobs > 1 and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            for batch in pool.map(lambda s: _run_seed(cfg, s), cfg.seeds):
                report.cells.extend(batch)
    else:
        for seed in cfg.seeds:
            report.cells.extend(_run_seed(cfg, seed))
    report.sort()
    return report
