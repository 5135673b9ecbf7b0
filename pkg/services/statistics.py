import logging
from typing import Iterable, List, Sequence

import numpy as np

from models.dynamics import CollapseSummary, EnsembleStatistics
from models.experiment import SummaryStatistics

logger = logging.getLogger(__name__)

PERCENTILES = (5, 25, 50, 75, 95)


def summarize(samples: Iterable[float]) -> SummaryStatistics:
    """
    Mean, unbiased standard deviation and 5/50/95 percentiles of a sample.

    Raises:
        ValueError: on an empty sample.
    """
    values = np.asarray(list(samples), dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty sample")
    stddev = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    p5, p50, p95 = np.percentile(values, [5, 50, 95])
    return SummaryStatistics(
        count=int(values.size),
        mean=float(np.mean(values)),
        stddev=stddev,
        p5=float(p5),
        p50=float(p50),
        p95=float(p95),
    )


def binomial_sigma(p: float, count: int) -> float:
    return float(np.sqrt(p * (1.0 - p) / count))


def ensemble_statistics(records: Sequence[CollapseSummary], keep_records: bool = True) -> EnsembleStatistics:
    """Aggregate per-trajectory records, sorted by trajectory index first."""
    ordered: List[CollapseSummary] = sorted(records, key=lambda record: record.index)
    count = len(ordered)
    outcomes = [record.outcome for record in ordered]
    frequencies = {
        "0": outcomes.count(0) / count,
        "1": outcomes.count(1) / count,
        "none": outcomes.count(None) / count,
    }
    times = np.array([record.collapse_time for record in ordered])
    plays = np.array([record.plays for record in ordered], dtype=float)
    percentiles = np.percentile(times, PERCENTILES)
    return EnsembleStatistics(
        count=count,
        outcome_frequencies=frequencies,
        mean_collapse_time=float(np.mean(times)),
        collapse_time_percentiles={f"p{q}": float(v) for q, v in zip(PERCENTILES, percentiles)},
        mean_play_count=float(np.mean(plays)),
        play_count_stddev=float(np.std(plays, ddof=1)) if count > 1 else 0.0,
        records=ordered if keep_records else [],
    )
