"""Bundled family data and the per-family verification runner."""

from .schema import CaseBundle, CaseError, bundled_case_ids, load_case, locate_case
from .runner import run_all
from .report import VerificationReport, emit

__all__ = [
    "CaseBundle",
    "CaseError",
    "VerificationReport",
    "bundled_case_ids",
    "emit",
    "load_case",
    "locate_case",
    "run_all",
]
