"""Experiment drivers; each returns a :class:`Report`."""

from .counterexample import counterexample_verify
from .coverage import coverage_probe, validate_case2_trace, verify_ez_lemma
from .oracle import oracle_corpus, oracle_equivalence
from .report import Report
from .separation import separation_demo
from .statistics import kim_statistic, loglaw_estimate

__all__ = [
    "Report",
    "counterexample_verify",
    "coverage_probe",
    "kim_statistic",
    "loglaw_estimate",
    "oracle_corpus",
    "oracle_equivalence",
    "separation_demo",
    "validate_case2_trace",
    "verify_ez_lemma",
]
