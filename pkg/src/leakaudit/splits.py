"""Deterministic train/validation/test partitions.

The splitting strategy decides whether domain features can leak from
training into test data, so every plan here is a pure function of the
dataset labels, the strategy parameters, and a seed, and can be replayed
bit-exactly from its text serialization.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass
class SplitPlan:
    """Index lists for one train/validation/test partition.

    For multi-subject plans the index arrays have shape [n, 2] holding
    (subject_id, sample_index) pairs; single-dataset plans hold flat
    sample indices.
    """

    strategy: str
    seed: int
    fold_id: int = 0
    train: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    val: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    test: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    note: str = ""

    def partitions(self) -> dict[str, np.ndarray]:
        return {"train": self.train, "val": self.val, "test": self.test}


def _ratio_counts(n: int, ratios: tuple[int, ...]) -> list[int]:
    """Partition sizes for n items; the remainder goes to the first
    (training) share."""
    total = sum(ratios)
    counts = [n * r // total for r in ratios]
    counts[0] += n - sum(counts)
    return counts


def leave_samples_out(
    dataset, ratios: tuple[int, int, int] = (8, 1, 1), seed: int = 0
) -> SplitPlan:
    """Random split within every domain at the given ratio.

    Samples of each domain are shuffled with the seeded generator and
    dealt to train/val/test stratified per domain, remainder to train.
    This is the leaking strategy under audit: every domain contributes
    to all three partitions.
    """
    domain_ids = np.asarray(dataset.domain_ids)
    rng = np.random.default_rng(seed)
    parts: dict[str, list[np.ndarray]] = {"train": [], "val": [], "test": []}
    for d in np.unique(domain_ids):
        idx = np.flatnonzero(domain_ids == d)
        if idx.size < sum(ratios):
            raise ConfigError(
                f"domain {d} has {idx.size} samples; needs >= {sum(ratios)} for a "
                f"{':'.join(map(str, ratios))} split"
            )
        idx = rng.permutation(idx)
        n_train, n_val, n_test = _ratio_counts(idx.size, ratios)
        parts["train"].append(idx[:n_train])
        parts["val"].append(idx[n_train : n_train + n_val])
        parts["test"].append(idx[n_train + n_val :])
    return SplitPlan(
        strategy="leave_samples_out",
        seed=seed,
        train=np.sort(np.concatenate(parts["train"])),
        val=np.sort(np.concatenate(parts["val"])),
        test=np.sort(np.concatenate(parts["test"])),
    )


def leave_domains_out(dataset, seed: int = 0) -> list[SplitPlan]:
    """One fold per held-out domain combination, one test domain per class.

    Every domain appears as a test domain exactly once across the folds
    (classes must have equally many domains for that to be possible; the
    canonical templates do). Non-test samples are split 9:1 train/val by
    a seeded shuffle.
    """
    domain_ids = np.asarray(dataset.domain_ids)
    class_ids = np.asarray(dataset.class_ids)
    rng = np.random.default_rng(seed)
    by_class: dict[int, np.ndarray] = {}
    for c in np.unique(class_ids):
        doms = np.unique(domain_ids[class_ids == c])
        if doms.size < 2:
            raise ConfigError(
                f"class {c} has a single domain; leave_domains_out needs >= 2 domains per class"
            )
        by_class[int(c)] = rng.permutation(doms)
    n_folds = max(d.size for d in by_class.values())
    plans = []
    for f in range(n_folds):
        test_domains = {int(doms[f % doms.size]) for doms in by_class.values()}
        test_mask = np.isin(domain_ids, sorted(test_domains))
        rest = np.flatnonzero(~test_mask)
        rest = rng.permutation(rest)
        n_train, n_val = _ratio_counts(rest.size, (9, 1))
        plans.append(
            SplitPlan(
                strategy="leave_domains_out",
                seed=seed,
                fold_id=f,
                train=np.sort(rest[:n_train]),
                val=np.sort(rest[n_train:]),
                test=np.sort(np.flatnonzero(test_mask)),
                note="test_domains=" + ",".join(map(str, sorted(test_domains))),
            )
        )
    return plans


def leave_subjects_out(
    datasets: list, val_strategy: str = "samples", seed: int = 0
) -> list[SplitPlan]:
    """One fold per test subject over a list of per-subject datasets.

    val_strategy="samples": remaining subjects' samples pooled and split
    9:1 into train/val. val_strategy="subjects": one further subject is
    the validation set. Index arrays hold (subject_id, sample_index)
    pairs.
    """
    if val_strategy not in ("samples", "subjects"):
        raise ConfigError(f"unknown val_strategy {val_strategy!r}")
    subjects = [ds.subject_id for ds in datasets]
    if len(set(subjects)) != len(subjects):
        raise ConfigError("duplicate subject ids in leave_subjects_out datasets")
    min_needed = 3 if val_strategy == "subjects" else 2
    if len(datasets) < min_needed:
        raise ConfigError(
            f"leave_subjects_out with val={val_strategy} needs >= {min_needed} subjects, "
            f"got {len(datasets)}"
        )
    sizes = {ds.subject_id: len(ds) for ds in datasets}
    rng = np.random.default_rng(seed)
    plans = []
    for f, test_subject in enumerate(subjects):
        rest = [s for s in subjects if s != test_subject]
        test = np.array([(test_subject, i) for i in range(sizes[test_subject])], dtype=np.int64)
        if val_strategy == "subjects":
            val_subject = rest[f % len(rest)]
            train_pairs = [
                (s, i) for s in rest if s != val_subject for i in range(sizes[s])
            ]
            val_pairs = [(val_subject, i) for i in range(sizes[val_subject])]
            train = np.array(train_pairs, dtype=np.int64)
            val = np.array(val_pairs, dtype=np.int64)
        else:
            pooled = np.array([(s, i) for s in rest for i in range(sizes[s])], dtype=np.int64)
            pooled = pooled[rng.permutation(len(pooled))]
            n_train, n_val = _ratio_counts(len(pooled), (9, 1))
            order = np.lexsort((pooled[:, 1], pooled[:, 0]))
            train = pooled[:n_train]
            val = pooled[n_train:]
            train = train[np.lexsort((train[:, 1], train[:, 0]))]
            val = val[np.lexsort((val[:, 1], val[:, 0]))]
            del pooled, order
        plans.append(
            SplitPlan(
                strategy=f"leave_subjects_out[val={val_strategy}]",
                seed=seed,
                fold_id=f,
                train=train,
                val=val,
                test=test,
                note=f"test_subject={test_subject}",
            )
        )
    return plans


def zero_shot_split(
    dataset, mode: str = "first_six", n_test_classes: int = 6, seed: int = 0
) -> SplitPlan:
    """Hold out whole classes of a one-class-per-domain design.

    mode="first_six": the n_test_classes presented earliest in time are
    the test set; mode="random": a seeded random subset is. Remaining
    classes' samples are split 9:1 train/val. Requires class id ==
    domain id for every domain (the block-design identity mapping).
    """
    if mode not in ("first_six", "random"):
        raise ConfigError(f"unknown zero-shot mode {mode!r}")
    template = dataset.template
    if any(template.class_map[d] != d for d in range(template.n_domains)):
        raise ConfigError(
            "zero_shot_split needs a one-to-one domain/class design "
            f"(identity class map); template {template.name!r} is not"
        )
    if not 0 < n_test_classes < template.n_domains:
        raise ConfigError(
            f"n_test_classes={n_test_classes} must lie in 1..{template.n_domains - 1}"
        )
    rng = np.random.default_rng(seed)
    time_order = dataset.domains_in_time_order()
    if mode == "first_six":
        test_classes = set(time_order[:n_test_classes])
    else:
        test_classes = set(
            int(c) for c in rng.choice(sorted(time_order), size=n_test_classes, replace=False)
        )
    class_ids = np.asarray(dataset.class_ids)
    test_mask = np.isin(class_ids, sorted(test_classes))
    rest = rng.permutation(np.flatnonzero(~test_mask))
    n_train, n_val = _ratio_counts(rest.size, (9, 1))
    return SplitPlan(
        strategy=f"zero_shot[{mode}]",
        seed=seed,
        train=np.sort(rest[:n_train]),
        val=np.sort(rest[n_train:]),
        test=np.sort(np.flatnonzero(test_mask)),
        note="test_classes=" + ",".join(map(str, sorted(test_classes))),
    )


def save_plan(plan: SplitPlan, path: str | os.PathLike) -> None:
    """Plain-text serialization enabling bit-exact replay."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"strategy={plan.strategy}\n")
        fh.write(f"seed={plan.seed}\n")
        fh.write(f"fold_id={plan.fold_id}\n")
        fh.write(f"note={plan.note}\n")
        for name, idx in plan.partitions().items():
            for row in np.atleast_1d(idx):
                if np.ndim(row) == 0:
                    fh.write(f"{name} {int(row)}\n")
                else:
                    fh.write(f"{name} {' '.join(str(int(v)) for v in row)}\n")


def load_plan(path: str | os.PathLike) -> SplitPlan:
    meta = {"strategy": "", "seed": "0", "fold_id": "0", "note": ""}
    rows: dict[str, list] = {"train": [], "val": [], "test": []}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if "=" in line and line.split("=", 1)[0] in meta:
                key, value = line.split("=", 1)
                meta[key] = value
                continue
            name, *values = line.split()
            if name not in rows:
                raise ConfigError(f"{path}: unknown split line {line!r}")
            rows[name].append([int(v) for v in values])

    def pack(entries: list) -> np.ndarray:
        if not entries:
            return np.empty(0, dtype=np.int64)
        if len(entries[0]) == 1:
            return np.array([e[0] for e in entries], dtype=np.int64)
        return np.array(entries, dtype=np.int64)

    return SplitPlan(
        strategy=meta["strategy"],
        seed=int(meta["seed"]),
        fold_id=int(meta["fold_id"]),
        note=meta["note"],
        train=pack(rows["train"]),
        val=pack(rows["val"]),
        test=pack(rows["test"]),
    )
