"""Audit report assembly and serialization.

A report is a flat list of cells, one per (task, template, split, band,
subject, seed) evaluation, plus run metadata. JSON is the canonical
form (byte-stable for fixed config and seeds, apart from the timestamp
field); cells.csv is a lossless tidy export; grid CSVs are table-shaped
views for plotting.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigError
from .stats import bonferroni, one_sample_ttest

REPORT_VERSION = 1

_CSV_COLUMNS = [
    "task", "template", "split", "band", "subject", "seed", "fold",
    "accuracy_pct", "chance_pct", "n_test", "status", "note", "extras",
]


@dataclass
class ReportCell:
    task: str
    template: str
    split: str
    band: str = "full"
    subject: int = 0
    seed: int = 0
    fold: int = -1
    accuracy_pct: float = float("nan")
    chance_pct: float = float("nan")
    n_test: int = 0
    status: str = "ok"
    note: str = ""
    extras: dict = field(default_factory=dict)

    def key(self) -> tuple:
        return (self.task, self.template, self.split, self.band)


@dataclass
class SummaryRow:
    task: str
    template: str
    split: str
    band: str
    n_runs: int
    mean_pct: float
    sem_pct: float
    chance_pct: float
    p_value: float
    p_adjusted: float


@dataclass
class AuditReport:
    meta: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)

    def add(self, cell: ReportCell) -> None:
        self.cells.append(cell)

    def ok_cells(self) -> list:
        return [c for c in self.cells if c.status == "ok"]

    def sort(self) -> None:
        self.cells.sort(key=lambda c: (c.task, c.template, c.split, c.band, c.subject, c.seed, c.fold))

    def summarize(self, one_sided: bool = True) -> list[SummaryRow]:
        """Aggregate cells over subjects/seeds; t-test vs chance with
        Bonferroni adjustment across the summary's tests."""
        groups: dict[tuple, list[ReportCell]] = {}
        for cell in self.ok_cells():
            groups.setdefault(cell.key(), []).append(cell)
        rows = []
        raw_ps = []
        for key in sorted(groups):
            cells = groups[key]
            acc = np.array([c.accuracy_pct for c in cells], dtype=np.float64)
            chance = float(np.mean([c.chance_pct for c in cells]))
            sem = float(acc.std(ddof=1) / np.sqrt(acc.size)) if acc.size > 1 else 0.0
            if acc.size >= 2 and acc.std(ddof=1) > 0:
                _, p = one_sample_ttest(acc, chance, one_sided=one_sided)
            else:
                p = float("nan")
            rows.append(
                SummaryRow(
                    task=key[0], template=key[1], split=key[2], band=key[3],
                    n_runs=acc.size, mean_pct=float(acc.mean()), sem_pct=sem,
                    chance_pct=chance, p_value=p, p_adjusted=float("nan"),
                )
            )
            raw_ps.append(p)
        finite = [i for i, p in enumerate(raw_ps) if np.isfinite(p)]
        if finite:
            adjusted = bonferroni([raw_ps[i] for i in finite])
            for j, i in enumerate(finite):
                rows[i].p_adjusted = float(adjusted[j])
        return rows

    def to_json(self) -> str:
        self.sort()
        payload = {
            "meta": self.meta,
            "cells": [asdict(c) for c in self.cells],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AuditReport":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed report JSON: {exc}") from None
        if not isinstance(payload, dict) or "cells" not in payload:
            raise ConfigError("report JSON must contain a 'cells' array")
        cells = [ReportCell(**c) for c in payload["cells"]]
        return cls(meta=payload.get("meta", {}), cells=cells)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "AuditReport":
        if not os.path.exists(path):
            raise ConfigError(f"report file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def make_meta(config: dict | None, seeds: list[int]) -> dict:
    canon = json.dumps(config or {}, sort_keys=True)
    return {
        "version": REPORT_VERSION,
        "config_hash": hashlib.sha256(canon.encode("utf-8")).hexdigest(),
        "seeds": list(seeds),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def merge_reports(reports: list[AuditReport]) -> AuditReport:
    """Union of cells; seed lists concatenate, subject counts add up."""
    merged = AuditReport(meta={"version": REPORT_VERSION, "merged_from": len(reports)})
    seeds: list[int] = []
    for r in reports:
        merged.cells.extend(r.cells)
        seeds.extend(r.meta.get("seeds", []))
    merged.meta["seeds"] = seeds
    merged.meta["n_subjects"] = len(
        {(c.seed, c.subject) for c in merged.cells}
    )
    merged.sort()
    return merged


def write_cells_csv(report: AuditReport, path: str | os.PathLike) -> None:
    """Tidy lossless export: floats as repr, extras as JSON."""
    report.sort()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for c in report.cells:
            writer.writerow(
                [
                    c.task, c.template, c.split, c.band, c.subject, c.seed, c.fold,
                    repr(float(c.accuracy_pct)), repr(float(c.chance_pct)),
                    c.n_test, c.status, c.note, json.dumps(c.extras, sort_keys=True),
                ]
            )


def read_cells_csv(path: str | os.PathLike) -> AuditReport:
    cells = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected cells.csv header {header}")
        for row in reader:
            rec = dict(zip(_CSV_COLUMNS, row))
            cells.append(
                ReportCell(
                    task=rec["task"], template=rec["template"], split=rec["split"],
                    band=rec["band"], subject=int(rec["subject"]), seed=int(rec["seed"]),
                    fold=int(rec["fold"]), accuracy_pct=float(rec["accuracy_pct"]),
                    chance_pct=float(rec["chance_pct"]), n_test=int(rec["n_test"]),
                    status=rec["status"], note=rec["note"], extras=json.loads(rec["extras"]),
                )
            )
    return AuditReport(cells=cells)


def _fmt(mean: float, sem: float) -> str:
    return f"{mean:.2f}±{sem:.2f}"


def write_grid_csvs(report: AuditReport, out_dir: str | os.PathLike) -> list[str]:
    """Table-shaped CSVs: one accuracy grid per task (rows = band or
    metric, columns = template), with chance rows. Returns written paths."""
    rows = report.summarize()
    os.makedirs(out_dir, exist_ok=True)
    templates = sorted({r.template for r in rows})
    tasks = sorted({r.task for r in rows})
    written = []
    for task in tasks:
        task_rows = [r for r in rows if r.task == task]
        bands = sorted({r.band for r in task_rows})
        path = os.path.join(out_dir, f"grid_{task}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["band"] + templates)
            for band in bands:
                line = [band]
                for template in templates:
                    match = [r for r in task_rows if r.band == band and r.template == template]
                    line.append(_fmt(match[0].mean_pct, match[0].sem_pct) if match else "-")
                writer.writerow(line)
            chance_line = ["chance"]
            for template in templates:
                match = [r for r in task_rows if r.template == template]
                chance_line.append(f"{match[0].chance_pct:.2f}" if match else "-")
            writer.writerow(chance_line)
        written.append(path)
    return written
