"""Tabular reports for the command line, built as pandas frames.

CSV output keeps pandas' default float formatting, the shortest repr that round-trips
every float exactly.
"""

import sys
import logging
from typing import Iterable, List, Optional, Sequence

import pandas as pd

from bounds import BkSequence, BoundEntry
from enumeration import SliceReport
from verifier import SweepRow, VerifyRun

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["n", "trial", "tv", "delta1", "l1", "l2", "ratio_tv_delta1", "ratio_tv_l1"]


def slices_frame(report: SliceReport) -> pd.DataFrame:
    """Rows k, delta_k for k = 0..n followed by tv, two_tv, slice_sum and residual"""
    rows = [(str(k), d) for k, d in enumerate(report.delta)]
    rows += [
        ("tv", report.tv_exact),
        ("two_tv", 2.0 * report.tv_exact),
        ("slice_sum", report.slice_sum),
        ("residual", report.identity_residual),
    ]
    return pd.DataFrame(rows, columns=["k", "delta_k"])


def bk_frame(bk: BkSequence) -> pd.DataFrame:
    rows = []
    for k in range(1, bk.n + 1):
        closed = bk.closed_form(k) if k >= 2 else ""
        rows.append((str(k), bk.recurrence(k), closed))
    rows.append(("sum_tail", bk.sum_tail, bk.target))
    rows.append(("residual", abs(bk.sum_tail - bk.target), ""))
    return pd.DataFrame(rows, columns=["k", "B_k_recurrence", "B_k_closed_form"])


def bounds_frame(entries: Iterable[BoundEntry]) -> pd.DataFrame:
    return pd.DataFrame(
        [(e.name, e.lhs, e.rhs, e.margin, e.satisfied, e.out_of_regime) for e in entries],
        columns=["bound", "lhs", "rhs", "margin", "satisfied", "out_of_regime"],
    )


def verify_frame(runs: Sequence[VerifyRun]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "theorem": run.theorem_id.value,
                "n_min": run.n_min,
                "n_max": run.n_max,
                "trials": run.trials,
                "seed": run.seed,
                "sampling": run.sampling_regime.value,
                "boundary_biased": run.boundary_biased,
                "out_of_regime": run.out_of_regime,
                "violations": run.violations,
                "worst_margin": run.worst_margin,
                "worst_trial": "" if run.worst_trial is None else run.worst_trial,
            }
            for run in runs
        ]
    )


def sweep_frame(rows: List[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (r.n, r.trial, r.tv, r.delta1, r.l1, r.l2, r.ratio_tv_delta1, r.ratio_tv_l1)
            for r in rows
        ],
        columns=SWEEP_COLUMNS,
    )


def sweep_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Per-n extremes of the two ratios"""
    return frame.groupby("n").agg(
        min_ratio_tv_delta1=("ratio_tv_delta1", "min"),
        max_ratio_tv_delta1=("ratio_tv_delta1", "max"),
        min_ratio_tv_l1=("ratio_tv_l1", "min"),
        max_ratio_tv_l1=("ratio_tv_l1", "max"),
    ).reset_index()


def write_csv(frame: pd.DataFrame, out: Optional[str] = None) -> None:
    """Write to `out`, or to standard output when out is None"""
    if out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
        return
    try:
        frame.to_csv(out, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {out}")
    except OSError as e:
        logger.error(f"Error writing {out}: {str(e)}")
        raise


def format_table(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False)
