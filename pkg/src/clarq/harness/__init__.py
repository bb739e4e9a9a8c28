"""Synthetic datasets, workload runner, and report emitters."""

from .synth import (
    SyntheticData,
    blob_separation,
    generate_corpus,
    generate_synthetic,
    build_relational_workload,
    build_vector_workload,
)
from .workload import EntryResult, RunReport, WorkloadEntry, run_workload
from .report import read_entries_csv, write_report

__all__ = [
    "SyntheticData",
    "blob_separation",
    "generate_corpus",
    "generate_synthetic",
    "build_relational_workload",
    "build_vector_workload",
    "WorkloadEntry",
    "EntryResult",
    "RunReport",
    "run_workload",
    "write_report",
    "read_entries_csv",
]
