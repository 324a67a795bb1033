"""Online target selection by local search with k-nearest-neighbour duration estimates."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .audio import IdealFeatureSequence
from .errors import StaleObservation
from .level import FeatureBounds

EXHAUSTION_MODES = ("hold", "loop", "terminate")


class ControllerArchive:
    """Ring buffer of (target feature, play duration) pairs, oldest first."""

    def __init__(self, capacity: int = 20, entries=()):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: deque[tuple[float, float]] = deque(maxlen=capacity)
        for f, d in entries:
            self.push(f, d)

    def push(self, feature: float, duration: float) -> None:
        self._entries.append((float(feature), float(duration)))

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    @property
    def features(self) -> np.ndarray:
        return np.array([f for f, _ in self._entries])

    @property
    def durations(self) -> np.ndarray:
        return np.array([d for _, d in self._entries])

    def copy(self) -> "ControllerArchive":
        return ControllerArchive(self.capacity, self._entries)


@dataclass(frozen=True)
class LsKnnParams:
    trials: int = 50
    k: int = 5
    sigma: float = 0.02
    nominal_duration: float = 2.8
    bounds: FeatureBounds = field(default_factory=FeatureBounds)
    time_unit: float = 0.02322
    exhaustion: str = "hold"
    # lattice of achievable targets (1/width for the built-in generator); None = continuous
    resolution: Optional[float] = None
    archive_size: int = 20

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.nominal_duration <= 0:
            raise ValueError("nominal_duration must be positive")
        if self.exhaustion not in EXHAUSTION_MODES:
            raise ValueError(f"exhaustion must be one of {EXHAUSTION_MODES}")
        if self.resolution is not None and self.resolution <= 0:
            raise ValueError("resolution must be positive")

    def snap(self, f: float) -> float:
        f = self.bounds.clamp(f)
        if self.resolution is None:
            return f
        k = round(f / self.resolution)
        per_unit = 1.0 / self.resolution
        if abs(per_unit - round(per_unit)) < 1e-9:
            # k / 28 rather than k * (1/28): matches difficulty() bit for bit
            return self.bounds.clamp(k / round(per_unit))
        return self.bounds.clamp(k * self.resolution)


@dataclass
class ControlState:
    f_prev: float
    b_prev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)


def estimate_duration(feature: float, archive: ControllerArchive, params: LsKnnParams) -> float:
    """Mean duration of the k entries closest in feature; newer entries win ties."""
    n = len(archive)
    if n == 0:
        return params.nominal_duration
    dist = np.abs(archive.features - feature)
    age = np.arange(n)[::-1]  # 0 for the newest entry
    order = np.lexsort((age, dist))
    return float(archive.durations[order[: params.k]].mean())


def window_indices(start: float, duration: float, time_unit: float) -> tuple[int, int]:
    """Half-open time-unit window [round(b/u), round((b+d)/u))."""
    lo = int(math.floor(start / time_unit + 0.5))
    hi = int(math.floor((start + duration) / time_unit + 0.5))
    return lo, hi


def ideal_values(f_star: IdealFeatureSequence, lo: int, hi: int, mode: str = "hold") -> np.ndarray:
    """f*_t for t in [lo, hi); indices past the end hold the final value or wrap."""
    v = f_star.values
    idx = np.arange(lo, hi)
    if mode == "loop":
        idx = idx % len(v)
    else:
        idx = np.minimum(idx, len(v) - 1)
    return v[idx]


def evaluate_candidate(feature: float, start: float, duration: float,
                       f_star: IdealFeatureSequence, mode: str = "hold") -> float:
    """Mean |f*_t - feature| over the estimated play window of a segment."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    lo, hi = window_indices(start, duration, f_star.time_unit)
    hi = max(hi, lo + 1)
    return float(np.mean(np.abs(ideal_values(f_star, lo, hi, mode) - feature)))


Estimator = Callable[[float], float]


def next_target(state: ControlState, archive: ControllerArchive, f_star: IdealFeatureSequence,
                params: LsKnnParams, estimator: Optional[Estimator] = None) -> float:
    """Choose the next segment's target by local search from the previous one.

    ``estimator`` overrides the k-NN duration estimate (used by baselines and
    oracle studies); by default durations come from ``archive``.
    """
    if estimator is None:
        def estimator(f):
            return estimate_duration(f, archive, params)

    def cost(f, b):
        return evaluate_candidate(f, b, estimator(f), f_star, params.exhaustion)

    b_est = state.b_prev + estimator(state.f_prev)
    best = state.f_prev
    best_err = cost(best, b_est)
    normals = state.rng.normal(0.0, params.sigma, size=params.trials)
    for xi in normals:
        cand = params.snap(best + xi)
        err = cost(cand, b_est)
        if err < best_err:
            best, best_err = cand, err
    return best


class LsKnnController:
    """Stateful wrapper pairing the control state with its archive."""

    def __init__(self, params: LsKnnParams = LsKnnParams(), seed: int = 0,
                 estimator: Optional[Estimator] = None):
        self.params = params
        self.archive = ControllerArchive(params.archive_size)
        self.state: Optional[ControlState] = None
        self.seed = seed
        self.estimator = estimator

    def start(self, f_star: IdealFeatureSequence) -> float:
        """First target: the opening value of the ideal sequence."""
        f1 = self.params.snap(float(f_star.values[0]))
        self.state = ControlState(f_prev=f1, b_prev=0.0, seed=self.seed)
        return f1

    def propose(self, f_star: IdealFeatureSequence) -> float:
        f = next_target(self.state, self.archive, f_star, self.params, self.estimator)
        self.state.f_prev = f
        return f

    def observe(self, feature: float, duration: float, start: float) -> None:
        observe(self.state, self.archive, feature, duration, start)


def observe(state: ControlState, archive: ControllerArchive, feature: float,
            duration: float, start: float) -> None:
    """Record a finished play-through and the start time of the segment now playing."""
    if start < state.b_prev:
        raise StaleObservation(f"start time {start} precedes {state.b_prev}")
    archive.push(feature, duration)
    state.b_prev = start


class ConstantController:
    """Baseline emitting one fixed target."""

    def __init__(self, value: float, params: LsKnnParams = LsKnnParams()):
        self.value = params.snap(value)
        self.params = params

    def start(self, f_star):
        return self.value

    def propose(self, f_star):
        return self.value

    def observe(self, feature, duration, start):
        pass
