"""Audit task runners.

Each runner trains the appropriate model under a given split and returns
a report cell whose chance level comes from the label cardinality of the
dataset at hand. Runners are pure given (dataset, plan, config); all
randomness flows through seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import splits as splitmod
from ..dsp import BANDS, Band, band_available, bandpass_array, get_band
from ..errors import ConfigError
from ..neural import (
    Mlp2,
    SimpleCnn,
    SimpleCnnConfig,
    TrainConfig,
    TrainResult,
    accuracy_pct,
    mlp2_train,
    pooled_features,
    predict_logits,
    train,
)
from .metrics import (
    acc_near,
    acc_nth_presented,
    chance_pct,
    make_embedding_bank,
    rank_accuracy,
    top_k_accuracy,
)
from .pipeline import build_dataset
from .report import ReportCell

CLASSIFIER_TASKS = ("dlc", "tlc_df", "tlc_eeg", "tlc_eeg_wodo")
ALL_TASKS = CLASSIFIER_TASKS + ("zero_shot", "retrieval")


@dataclass
class TaskOutput:
    cell: ReportCell
    result: TrainResult | None = None
    model: object | None = None
    x: np.ndarray | None = None


def banded_samples(dataset, band: Band | str, chunk: int = 512) -> np.ndarray:
    """Stacked sample array, band-passed in chunks to bound memory."""
    if isinstance(band, str):
        band = get_band(band)
    x = dataset.stack()
    if band.name == "full":
        return x
    fs = dataset.template.target_fs
    if not band_available(band, fs):
        raise ConfigError(f"band {band.name!r} unavailable at fs={fs} Hz")
    out = np.empty_like(x)
    for start in range(0, len(x), chunk):
        sl = slice(start, start + chunk)
        out[sl] = bandpass_array(x[sl], fs, band).astype(x.dtype)
    return out


def _cnn_for(dataset, n_outputs: int) -> SimpleCnn:
    t = dataset.template
    sample = dataset.samples[0].data
    cfg = SimpleCnnConfig.for_samples(
        channels=sample.shape[0],
        timepoints=sample.shape[1],
        fs=t.target_fs,
        n_outputs=n_outputs,
    )
    return SimpleCnn(cfg)


def _partition_accuracies(model, params, x, labels, plan) -> dict:
    out = {}
    for name, idx in plan.partitions().items():
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            out[f"{name}_acc_pct"] = float("nan")
            continue
        logits = predict_logits(model, params, x[idx])
        out[f"{name}_acc_pct"] = accuracy_pct(logits, labels[idx])
    return out


def _classification_cell(
    task: str, dataset, plan, labels: np.ndarray, band: str, cfg: TrainConfig
) -> TaskOutput:
    x = banded_samples(dataset, band)
    model = _cnn_for(dataset, int(np.unique(labels).size))
    result = train(model, x, labels, plan, "cross_entropy", cfg)
    accs = _partition_accuracies(model, result.params, x, labels, plan)
    cell = ReportCell(
        task=task,
        template=dataset.template.name,
        split=plan.strategy,
        band=band,
        subject=dataset.subject_id,
        seed=cfg.seed,
        fold=plan.fold_id,
        accuracy_pct=accs["test_acc_pct"],
        chance_pct=chance_pct(int(np.unique(labels).size)),
        n_test=int(np.asarray(plan.test).shape[0]),
        extras=accs,
    )
    return TaskOutput(cell=cell, result=result, model=model, x=x)


def run_dlc(dataset, plan, train_config: TrainConfig, band: str = "full") -> TaskOutput:
    """Domain label classification: can the net identify which block a
    sample came from? Chance = 100 / n_domains."""
    if not plan.strategy.startswith("leave_samples_out"):
        raise ConfigError("run_dlc audits the leave_samples_out strategy")
    return _classification_cell("dlc", dataset, plan, dataset.domain_ids, band, train_config)


def run_tlc_eeg(dataset, plan, train_config: TrainConfig, band: str = "full") -> TaskOutput:
    """End-to-end class label classification. Chance = 100 / n_classes."""
    return _classification_cell("tlc_eeg", dataset, plan, dataset.class_ids, band, train_config)


def run_tlc_df(
    dataset, plan, train_config: TrainConfig, dlc_output: TaskOutput | None
) -> TaskOutput:
    """Class labels decoded from the frozen domain-feature representation.

    Skipped (with a notice) when classes and domains coincide, since the
    mapping would be the identity.
    """
    t = dataset.template
    identity = all(t.class_map[d] == d for d in range(t.n_domains)) and t.n_classes == t.n_domains
    if identity:
        cell = ReportCell(
            task="tlc_df", template=t.name, split=plan.strategy,
            subject=dataset.subject_id, seed=train_config.seed,
            status="skipped",
            note="class and domain labels coincide; feature-to-class map is the identity",
        )
        return TaskOutput(cell=cell)
    if dlc_output is None or dlc_output.result is None:
        raise ConfigError("run_tlc_df needs the trained DLC model for the same split")
    x = dlc_output.x if dlc_output.x is not None else dataset.stack()
    features = pooled_features(dlc_output.model, dlc_output.result.params, x)
    labels = dataset.class_ids
    result, mlp = mlp2_train(features, labels, train_config, plan)
    accs = _partition_accuracies(mlp, result.params, features, labels, plan)
    cell = ReportCell(
        task="tlc_df", template=t.name, split=plan.strategy,
        band=dlc_output.cell.band, subject=dataset.subject_id, seed=train_config.seed,
        accuracy_pct=accs["test_acc_pct"],
        chance_pct=chance_pct(t.n_classes),
        n_test=int(np.asarray(plan.test).shape[0]),
        extras=accs,
    )
    return TaskOutput(cell=cell, result=result, model=mlp)


def run_tlc_eeg_wodo(
    dataset, folds: list, train_config: TrainConfig, band: str = "full"
) -> TaskOutput:
    """End-to-end class classification without domain overlap: train on
    leave-domains-out folds and average test accuracy across them."""
    if not folds:
        raise ConfigError("run_tlc_eeg_wodo needs at least one leave_domains_out fold")
    labels = dataset.class_ids
    x = banded_samples(dataset, band)
    fold_accs = []
    n_test = 0
    for plan in folds:
        model = _cnn_for(dataset, int(np.unique(labels).size))
        result = train(model, x, labels, plan, "cross_entropy", train_config)
        logits = predict_logits(model, result.params, x[np.asarray(plan.test)])
        fold_accs.append(accuracy_pct(logits, labels[np.asarray(plan.test)]))
        n_test += int(np.asarray(plan.test).shape[0])
    extras = {f"fold{i}_acc_pct": a for i, a in enumerate(fold_accs)}
    extras["n_folds"] = len(folds)
    cell = ReportCell(
        task="tlc_eeg_wodo",
        template=dataset.template.name,
        split=folds[0].strategy,
        band=band,
        subject=dataset.subject_id,
        seed=train_config.seed,
        accuracy_pct=float(np.mean(fold_accs)),
        chance_pct=chance_pct(int(np.unique(labels).size)),
        n_test=n_test,
        extras=extras,
    )
    return TaskOutput(cell=cell)


def run_zero_shot(
    dataset,
    mode: str,
    train_config: TrainConfig,
    n_test_classes: int = 6,
    split_seed: int = 0,
) -> TaskOutput:
    """Hold out whole classes, train on the rest, and measure where the
    held-out samples land.

    acc_near: share predicted as a temporally adjacent class (reported
    for random mode only; under first-six selection the early classes
    have no trained neighbor). acc_7th: share predicted as the class
    presented seventh.
    """
    plan = splitmod.zero_shot_split(dataset, mode, n_test_classes, split_seed)
    class_ids = dataset.class_ids
    trained = np.array(sorted(np.unique(class_ids[plan.train])), dtype=np.int64)
    remap = -np.ones(int(class_ids.max()) + 1, dtype=np.int64)
    remap[trained] = np.arange(trained.size)
    labels = remap[class_ids]
    x = dataset.stack()
    model = _cnn_for(dataset, trained.size)
    result = train(model, x, labels, plan, "cross_entropy", train_config)
    test_idx = np.asarray(plan.test)
    logits = predict_logits(model, result.params, x[test_idx])
    pred = trained[np.argmax(logits, axis=1)]
    order = [dataset.template.class_map[d] for d in dataset.domains_in_time_order()]
    a7 = acc_nth_presented(pred, order, n=7)
    near = acc_near(pred, class_ids[test_idx], order) if mode == "random" else None
    extras = {
        "acc_7th_pct": a7,
        "chance_7th_pct": chance_pct(trained.size),
        "n_trained_classes": int(trained.size),
    }
    if near is not None:
        extras["acc_near_pct"] = near
    cell = ReportCell(
        task="zero_shot",
        template=dataset.template.name,
        split=plan.strategy,
        subject=dataset.subject_id,
        seed=train_config.seed,
        accuracy_pct=a7,
        chance_pct=chance_pct(trained.size),
        n_test=int(test_idx.size),
        note=f"mode={mode}",
        extras=extras,
    )
    return TaskOutput(cell=cell, result=result, model=model)


def run_retrieval(
    dataset,
    plan,
    loss_kind: str,
    train_config: TrainConfig,
    bank: np.ndarray | None = None,
    bank_seed: int = 0,
    embedding_dim: int = 768,
) -> TaskOutput:
    """Align sample embeddings to per-class vectors, then rank all
    candidates by cosine similarity on the test set."""
    if loss_kind not in ("cosine", "infonce"):
        raise ConfigError(f"retrieval loss must be 'cosine' or 'infonce', got {loss_kind!r}")
    t = dataset.template
    if bank is None:
        bank = make_embedding_bank(t.n_classes, dim=embedding_dim, seed=bank_seed)
    if bank.shape[0] != t.n_classes:
        raise ConfigError(f"bank has {bank.shape[0]} vectors for {t.n_classes} classes")
    class_ids = dataset.class_ids
    targets = bank[class_ids]
    x = dataset.stack()
    sample = dataset.samples[0].data
    cfg = SimpleCnnConfig.for_samples(
        channels=sample.shape[0], timepoints=sample.shape[1],
        fs=t.target_fs, n_outputs=bank.shape[1],
    )
    model = SimpleCnn(cfg)
    result = train(model, x, targets, plan, loss_kind, train_config)
    test_idx = np.asarray(plan.test)
    pred = predict_logits(model, result.params, x[test_idx])
    norms = np.linalg.norm(pred, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    scores = (pred / norms) @ bank.T
    true = class_ids[test_idx]
    top1 = top_k_accuracy(scores, true, 1)
    top5 = top_k_accuracy(scores, true, min(5, bank.shape[0]))
    rank = rank_accuracy(scores, true)
    n_candidates = bank.shape[0]
    cell = ReportCell(
        task="retrieval",
        template=t.name,
        split=plan.strategy,
        subject=dataset.subject_id,
        seed=train_config.seed,
        accuracy_pct=top1,
        chance_pct=chance_pct(n_candidates),
        n_test=int(test_idx.size),
        note=f"loss={loss_kind}",
        extras={
            "top1_pct": top1,
            "top5_pct": top5,
            "rank_acc_pct": rank,
            "chance_top5_pct": 100.0 * min(5, n_candidates) / n_candidates,
            "chance_rank_pct": 50.0,
            "loss": loss_kind,
        },
    )
    return TaskOutput(cell=cell, result=result, model=model)


def run_band_audit(
    dataset,
    bands: list[str],
    tasks: list[str],
    train_config: TrainConfig,
    split_seed: int = 0,
    max_folds: int | None = None,
) -> list[ReportCell]:
    """Bandpass-then-audit grid over |bands| x |tasks| cells.

    Bands above the dataset Nyquist are recorded as skipped, mirroring
    how a 128 Hz design cannot host a 55-95 Hz analysis.
    """
    fs = dataset.template.target_fs
    cells = []
    lso = splitmod.leave_samples_out(dataset, seed=split_seed)
    for band_name in bands:
        band = get_band(band_name)
        if not band_available(band, fs):
            for task in tasks:
                cells.append(
                    ReportCell(
                        task=task, template=dataset.template.name, split="-",
                        band=band_name, subject=dataset.subject_id, seed=train_config.seed,
                        status="skipped",
                        note=f"band {band_name} ({band.lo}-{band.hi} Hz) above Nyquist at fs={fs}",
                    )
                )
            continue
        dlc_out = None
        for task in tasks:
            if task == "dlc":
                dlc_out = run_dlc(dataset, lso, train_config, band=band_name)
                cells.append(dlc_out.cell)
            elif task == "tlc_df":
                if dlc_out is None:
                    dlc_out = run_dlc(dataset, lso, train_config, band=band_name)
                    cells.append(dlc_out.cell)
                cells.append(run_tlc_df(dataset, lso, train_config, dlc_out).cell)
            elif task == "tlc_eeg":
                cells.append(run_tlc_eeg(dataset, lso, train_config, band=band_name).cell)
            elif task == "tlc_eeg_wodo":
                try:
                    folds = splitmod.leave_domains_out(dataset, seed=split_seed)
                except ConfigError as exc:
                    cells.append(
                        ReportCell(
                            task=task, template=dataset.template.name, split="leave_domains_out",
                            band=band_name, subject=dataset.subject_id, seed=train_config.seed,
                            status="skipped", note=str(exc),
                        )
                    )
                    continue
                if max_folds is not None:
                    folds = folds[:max_folds]
                cells.append(run_tlc_eeg_wodo(dataset, folds, train_config, band=band_name).cell)
            else:
                raise ConfigError(f"band audit does not support task {task!r}")
    return cells


def sweep_domain_strength(
    base_spec,
    template,
    gammas,
    task: str,
    train_config: TrainConfig,
    seeds=(0, 1, 2),
    signature_kwargs: dict | None = None,
) -> dict:
    """Accuracy as a function of domain-signature strength.

    For each gamma: synthesize, inject at that strength, reorganize,
    split leave-samples-out, run the task; average accuracy over seeds.
    """
    gammas = list(gammas)
    if any(not 0 <= g <= 1 for g in gammas) or gammas != sorted(gammas):
        raise ConfigError("gammas must be ascending values in [0, 1]")
    if task not in ("dlc", "tlc_eeg"):
        raise ConfigError(f"sweep supports dlc or tlc_eeg, got {task!r}")
    if len(seeds) < 1:
        raise ConfigError("sweep needs at least one seed")
    acc = np.zeros((len(gammas), len(seeds)))
    for j, seed in enumerate(seeds):
        for i, gamma in enumerate(gammas):
            dataset = build_dataset(
                base_spec, template, subject_id=0, seed=int(seed),
                signature_strength=float(gamma), signature_kwargs=signature_kwargs,
            )
            plan = splitmod.leave_samples_out(dataset, seed=int(seed))
            cfg = replace(train_config, seed=int(seed))
            if task == "dlc":
                out = run_dlc(dataset, plan, cfg)
            else:
                out = run_tlc_eeg(dataset, plan, cfg)
            acc[i, j] = out.cell.accuracy_pct
    return {
        "gammas": gammas,
        "seeds": list(seeds),
        "task": task,
        "accuracy_per_seed": acc.tolist(),
        "accuracy_mean": acc.mean(axis=1).tolist(),
        "chance_pct": out.cell.chance_pct,
    }
