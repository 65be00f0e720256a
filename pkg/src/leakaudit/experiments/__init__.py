from .audit import run_audit, run_tlc_lsubjo
from .metrics import (
    acc_near,
    acc_nth_presented,
    binomial_se_pct,
    chance_pct,
    make_embedding_bank,
    rank_accuracy,
    rank_of_target,
    top_k_accuracy,
)
from .pipeline import build_dataset, build_dataset_from_recording, subject_seed
from .report import (
    AuditReport,
    ReportCell,
    SummaryRow,
    make_meta,
    merge_reports,
    read_cells_csv,
    write_cells_csv,
    write_grid_csvs,
)
from .stats import bh_fdr, bonferroni, one_sample_ttest
from .tasks import (
    banded_samples,
    run_band_audit,
    run_dlc,
    run_retrieval,
    run_tlc_df,
    run_tlc_eeg,
    run_tlc_eeg_wodo,
    run_zero_shot,
    sweep_domain_strength,
)

__all__ = [
    "AuditReport",
    "ReportCell",
    "SummaryRow",
    "acc_near",
    "acc_nth_presented",
    "banded_samples",
    "bh_fdr",
    "binomial_se_pct",
    "bonferroni",
    "build_dataset",
    "build_dataset_from_recording",
    "chance_pct",
    "make_embedding_bank",
    "make_meta",
    "merge_reports",
    "one_sample_ttest",
    "rank_accuracy",
    "rank_of_target",
    "read_cells_csv",
    "run_audit",
    "run_band_audit",
    "run_dlc",
    "run_retrieval",
    "run_tlc_df",
    "run_tlc_eeg",
    "run_tlc_eeg_wodo",
    "run_tlc_lsubjo",
    "run_zero_shot",
    "subject_seed",
    "sweep_domain_strength",
    "top_k_accuracy",
    "write_cells_csv",
    "write_grid_csvs",
]
