import math

import numpy as np
import pytest

from models.dynamics import CollapseSummary
from services.cache_service import CacheService
from services.parallel import parallel_map
from services.statistics import binomial_sigma, ensemble_statistics, summarize


def welford(samples):
    count, mean, m2 = 0, 0.0, 0.0
    for x in samples:
        count += 1
        delta = x - mean
        mean += delta / count
        m2 += delta * (x - mean)
    return mean, math.sqrt(m2 / (count - 1))


class TestSummarize:
    def test_matches_streaming_estimate(self, rng):
        samples = rng.exponential(2.0, size=5000)
        summary = summarize(samples)
        mean, stddev = welford(samples)
        assert summary.count == 5000
        assert summary.mean == pytest.approx(mean, rel=1e-12)
        assert summary.stddev == pytest.approx(stddev, rel=1e-10)
        assert summary.p5 <= summary.p50 <= summary.p95

    def test_single_sample(self):
        summary = summarize([3.0])
        assert summary.stddev == 0.0
        assert summary.p50 == 3.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            summarize([])


class TestBinomialSigma:
    def test_value(self):
        assert binomial_sigma(0.25, 100) == pytest.approx(math.sqrt(0.1875) / 10)


class TestEnsembleStatistics:
    def test_sorts_and_counts(self):
        records = [
            CollapseSummary(index=2, outcome=1, plays=2, collapse_time=2.0),
            CollapseSummary(index=0, outcome=0, plays=1, collapse_time=1.0),
            CollapseSummary(index=1, outcome=None, plays=3, collapse_time=3.0),
            CollapseSummary(index=3, outcome=0, plays=2, collapse_time=2.0),
        ]
        stats = ensemble_statistics(records)
        assert [record.index for record in stats.records] == [0, 1, 2, 3]
        assert stats.outcome_frequencies == {"0": 0.5, "1": 0.25, "none": 0.25}
        assert stats.mean_collapse_time == 2.0
        assert stats.mean_play_count == 2.0
        assert set(stats.collapse_time_percentiles) == {"p5", "p25", "p50", "p75", "p95"}

    def test_drops_records_on_request(self):
        records = [CollapseSummary(index=0, outcome=0, plays=1, collapse_time=1.0)]
        assert ensemble_statistics(records, keep_records=False).records == []


class TestParallelMap:
    def test_keeps_order(self):
        items = list(range(-50, 50))
        assert parallel_map(abs, items, threads=3) == [abs(x) for x in items]

    def test_serial_path(self):
        assert parallel_map(str, [1, 2], threads=1) == ["1", "2"]


class TestCacheService:
    def test_computes_once(self):
        cache = CacheService()
        calls = []
        for _ in range(3):
            value = cache.get_or_compute(("stage", 4), lambda: calls.append(1) or 42)
        assert value == 42
        assert len(calls) == 1
        assert cache.hits == 2 and cache.get_size() == 1
        cache.clear()
        assert cache.get_size() == 0 and cache.hits == 0

    def test_stored_none_is_a_hit(self):
        cache = CacheService()
        calls = []
        for _ in range(2):
            assert cache.get_or_compute("empty", lambda: calls.append(1)) is None
        assert len(calls) == 1
        assert (cache.hits, cache.misses) == (1, 1)
