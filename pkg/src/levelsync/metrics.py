"""Error functionals and level-quality metrics for generated runs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .audio import IdealFeatureSequence
from .controller import ideal_values, window_indices
from .errors import EmptyRun, TooFewSegments
from .level import FeatureBounds, Segment, concat, difficulty, tile_difference_ratio, tile_pattern_divergence

FUN_LOWER = 0.26
FUN_UPPER = 0.94
FUN_COMPARISONS = 3
FUN_STRIDE = 14


@dataclass(frozen=True)
class SegmentRecord:
    index: int
    target: float
    feature: float
    start: float
    duration: float
    playable: bool = True
    resamples: int = 0
    fallback: bool = False


@dataclass
class RunReport:
    records: list[SegmentRecord]
    f_star: IdealFeatureSequence
    bounds: FeatureBounds = field(default_factory=FeatureBounds)
    eps_inner: float = 0.0
    eps_outer: float = 0.0
    eps_all: float = 0.0
    playability_rate: float = 1.0
    fun_distance: Optional[float] = None
    segments: list[Segment] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    latencies: list = field(default_factory=list, compare=False, repr=False)

    @property
    def total_time(self) -> float:
        return sum(r.duration for r in self.records)

    @property
    def fun_sqrt(self) -> Optional[float]:
        return None if self.fun_distance is None else math.sqrt(self.fun_distance)


def _windows(records: Sequence[SegmentRecord], time_unit: float) -> list[tuple[int, int]]:
    if not records:
        raise EmptyRun("run has no segments")
    return [window_indices(r.start, r.duration, time_unit) for r in records]


def _weighted_error(records, f_star, bounds, mode, pick) -> float:
    windows = _windows(records, f_star.time_unit)
    total = sum(hi - lo for lo, hi in windows)
    if total <= 0:
        raise EmptyRun("run spans no time units")
    acc = 0.0
    for r, (lo, hi) in zip(records, windows):
        if hi > lo:
            acc += float(np.sum(np.abs(ideal_values(f_star, lo, hi, mode) - pick(r))))
    return acc / (total * bounds.span)


def inner_error(records: Sequence[SegmentRecord], f_star: IdealFeatureSequence,
                bounds: FeatureBounds = FeatureBounds(), mode: str = "hold") -> float:
    """Time-normalised deviation of the targets from the ideal sequence."""
    return _weighted_error(records, f_star, bounds, mode, lambda r: r.target)


def overall_error(records: Sequence[SegmentRecord], f_star: IdealFeatureSequence,
                  bounds: FeatureBounds = FeatureBounds(), mode: str = "hold") -> float:
    """Time-normalised deviation of the achieved features from the ideal sequence."""
    return _weighted_error(records, f_star, bounds, mode, lambda r: r.feature)


def outer_error(records: Sequence[SegmentRecord], bounds: FeatureBounds = FeatureBounds(),
                time_unit: float = 0.02322) -> float:
    """Duration-weighted |target - achieved|, weights measured in whole time units."""
    windows = _windows(records, time_unit)
    total = sum(hi - lo for lo, hi in windows)
    if total <= 0:
        raise EmptyRun("run spans no time units")
    acc = sum((hi - lo) * abs(r.target - r.feature) for r, (lo, hi) in zip(records, windows))
    return acc / (total * bounds.span)


def controllability(s: Segment, target: float, bounds: FeatureBounds = FeatureBounds()) -> float:
    return 1.0 - abs(difficulty(s) - target) / bounds.span


def novelty_scores(level: Sequence[Segment], comparisons: int = FUN_COMPARISONS,
                   stride: int = FUN_STRIDE) -> list[float]:
    """D(S_i) for i >= 2: mean tile-pattern divergence against preceding windows.

    Windows are segment-wide slices of the concatenated history ending
    ``k * stride`` tiles before its end, k = 0 .. comparisons-1; windows that
    would start before the history are skipped.
    """
    if len(level) < 2:
        raise TooFewSegments("need at least two segments")
    width = level[0].width
    full = concat(level)
    out = []
    for i in range(1, len(level)):
        end = i * width
        cur = full[:, end : end + width]
        divs = []
        for k in range(comparisons):
            hi = end - k * stride
            lo = hi - width
            if lo < 0:
                break
            divs.append(tile_pattern_divergence(cur, full[:, lo:hi]))
        out.append(float(np.mean(divs)))
    return out


def out_of_range_distance(scores: Sequence[float], lower: float = FUN_LOWER,
                          upper: float = FUN_UPPER) -> float:
    if len(scores) == 0:
        raise TooFewSegments("no scores to evaluate")
    d = [max(0.0, s - upper, lower - s) for s in scores]
    return float(np.mean(d))


def fun_range_score(level: Sequence[Segment], lower: float = FUN_LOWER, upper: float = FUN_UPPER,
                    comparisons: int = FUN_COMPARISONS, stride: int = FUN_STRIDE) -> float:
    """Mean distance of the novelty scores outside [lower, upper]."""
    return out_of_range_distance(novelty_scores(level, comparisons, stride), lower, upper)


def diversity(levels: Sequence[Sequence[Segment]]) -> float:
    """Mean pairwise tile-difference ratio, each pair truncated to the shorter level."""
    if len(levels) < 2:
        raise ValueError("diversity needs at least two levels")
    grids = [concat(lv) for lv in levels]
    ratios = []
    for a, b in itertools.combinations(grids, 2):
        w = min(a.shape[1], b.shape[1])
        ratios.append(tile_difference_ratio(a[:, :w], b[:, :w]))
    return float(np.mean(ratios))


def synthetic_target_walk(seed: int, length: int, sigma: float = 0.05,
                          bounds: FeatureBounds = FeatureBounds()) -> np.ndarray:
    """Uniform start followed by clamped Gaussian steps."""
    rng = np.random.default_rng(seed)
    out = np.empty(length)
    f = rng.uniform(bounds.f_min, bounds.f_max)
    for i in range(length):
        if i:
            f = bounds.clamp(f + rng.normal(0.0, sigma)) if sigma > 0 else f
        out[i] = f
    return out


def summarize(report: RunReport, mode: str = "hold") -> RunReport:
    """Fill the error and quality fields of a report from its records."""
    recs, fs, b = report.records, report.f_star, report.bounds
    report.eps_inner = inner_error(recs, fs, b, mode)
    report.eps_outer = outer_error(recs, b, fs.time_unit)
    report.eps_all = overall_error(recs, fs, b, mode)
    report.playability_rate = sum(r.playable for r in recs) / len(recs)
    if len(report.segments) >= 2:
        report.fun_distance = fun_range_score(report.segments)
    return report
