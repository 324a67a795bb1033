"""Controllable constructive segment generator with repair and resampling.

The generator honours the observation contract of a controllable designer:
it sees the last ``m_G`` segments and a scalar control signal (the target
difficulty) and emits one new segment. Hazards are laid out so that the
achieved difficulty equals the (optionally perturbed) hazard budget.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InfeasibleTarget
from .level import (
    SEGMENT_HEIGHT,
    SEGMENT_WIDTH,
    FeatureBounds,
    Segment,
    TileKind,
    flat_segment,
    gap_columns,
    runs,
    solid_mask,
)
from .playability import PhysicsParams, Trace, check_playable

# fun needs S_{i-1} and S_i, playability needs S_{i-1}
REQUIRED_LOOKBACK = 2

MIN_GROUND = 1
MAX_GROUND = 4
DEFAULT_GROUND = 2
# perch platforms sit this many rows above the walkway
PERCH_CLEARANCE = 4


@dataclass(frozen=True)
class GeneratorParams:
    outer_noise_sd: float = 0.0
    max_resamples: int = 10
    enemy_gap_mix: float = 0.5
    max_gap_width: Optional[int] = None
    step_prob: float = 0.08
    decorate: bool = True

    def __post_init__(self):
        if self.outer_noise_sd < 0:
            raise ValueError("outer_noise_sd must be >= 0")
        if self.max_resamples < 1:
            raise ValueError("max_resamples must be >= 1")
        if not 0.0 <= self.enemy_gap_mix <= 1.0:
            raise ValueError("enemy_gap_mix must lie in [0, 1]")
        if self.max_gap_width is not None and self.max_gap_width < 0:
            raise ValueError("max_gap_width must be >= 0")

    def gap_limit(self, physics: PhysicsParams) -> int:
        if self.max_gap_width is not None:
            return self.max_gap_width
        return max(0, physics.max_jump_span - 2)


@dataclass
class GeneratorContext:
    """Single-owner generator state: recent segments and the random stream."""

    seed: int = 0
    m_g: int = REQUIRED_LOOKBACK
    bounds: FeatureBounds = field(default_factory=FeatureBounds)
    params: GeneratorParams = field(default_factory=GeneratorParams)
    physics: PhysicsParams = field(default_factory=PhysicsParams)

    def __post_init__(self):
        if self.m_g < REQUIRED_LOOKBACK:
            raise ValueError(f"m_g must be >= {REQUIRED_LOOKBACK}")
        self.rng = np.random.default_rng(self.seed)
        self.history: deque[Segment] = deque(maxlen=self.m_g)

    def push(self, segment: Segment) -> None:
        self.history.append(segment)

    @property
    def last(self) -> Optional[Segment]:
        return self.history[-1] if self.history else None


@dataclass(frozen=True)
class GenerationResult:
    segment: Segment
    resamples: int
    fallback_used: bool = False
    trace: Optional[Trace] = None

    def __iter__(self):
        return iter((self.segment, self.resamples))


def ground_height(grid: np.ndarray, col: int) -> int:
    """Rows of contiguous solid tiles at the bottom of a column."""
    solid = solid_mask(grid[::-1, col])
    return int(np.argmin(solid)) if not solid.all() else len(solid)


def exit_height(segment: Optional[Segment]) -> int:
    if segment is None:
        return DEFAULT_GROUND
    h = ground_height(segment.grid, segment.width - 1)
    return min(max(h, MIN_GROUND), MAX_GROUND) if h else DEFAULT_GROUND


def hazard_capacity(length: int, max_run: int) -> int:
    """Most hazard columns in ``length`` columns with runs <= max_run separated by one safe column."""
    if max_run <= 0 or length <= 0:
        return 0
    blocks, rest = divmod(length + 1, max_run + 1)
    return blocks * max_run + max(0, rest - 1)


def _split(rng: np.random.Generator, total: int, parts: int, lo: int, hi: int) -> list[int]:
    """Random composition of ``total`` into ``parts`` values in [lo, hi]."""
    out = [lo] * parts
    left = total - lo * parts
    while left > 0:
        open_ = [i for i in range(parts) if out[i] < hi]
        i = open_[int(rng.integers(len(open_)))]
        out[i] += 1
        left -= 1
    return out


def _hazard_layout(rng: np.random.Generator, m: int, length: int, max_run: int) -> np.ndarray:
    """Mask over ``length`` columns holding ``m`` hazards in separated runs."""
    mask = np.zeros(length, dtype=bool)
    if m == 0:
        return mask
    k_min = math.ceil(m / max_run)
    k_max = min(m, length - m + 1)
    k = int(rng.integers(k_min, k_max + 1))
    run_lengths = _split(rng, m, k, 1, max_run)
    n_safe = length - m
    # k-1 interior slots need at least one safe column, the two ends may be empty
    slots = [0] + [1] * (k - 1) + [0]
    extra = n_safe - (k - 1)
    for _ in range(extra):
        slots[int(rng.integers(k + 1))] += 1
    pos = slots[0]
    for j, rl in enumerate(run_lengths):
        mask[pos : pos + rl] = True
        pos += rl + slots[j + 1]
    return mask


def _terrain(rng: np.random.Generator, entry: int, hazard: np.ndarray, step_prob: float) -> np.ndarray:
    """Ground height per column; changes only between two safe columns."""
    w = len(hazard)
    heights = np.empty(w, dtype=int)
    heights[0] = entry
    for c in range(1, w):
        h = heights[c - 1]
        if not hazard[c] and not hazard[c - 1] and c < w - 1 and rng.random() < step_prob:
            h = int(np.clip(h + (1 if rng.random() < 0.5 else -1), MIN_GROUND, MAX_GROUND))
        heights[c] = h
    return heights


def budget_for(target: float, ctx: GeneratorContext) -> int:
    """Hazard units for a target, after the optional designer noise."""
    noise = ctx.rng.normal(0.0, ctx.params.outer_noise_sd) if ctx.params.outer_noise_sd > 0 else 0.0
    return int(math.floor(ctx.bounds.clamp(target + noise) * SEGMENT_WIDTH + 0.5))


def generate(ctx: GeneratorContext, target: float) -> Segment:
    """Build one segment whose difficulty approximates ``target``.

    The achieved difficulty is exactly ``budget / width``; without noise the
    budget is ``round(target * width)``. A zero budget gives plain flat ground.
    """
    b = ctx.bounds
    if not b.f_min <= target <= b.f_max:
        raise ValueError(f"target {target} outside [{b.f_min}, {b.f_max}]")
    rng, params = ctx.rng, ctx.params
    h, w = SEGMENT_HEIGHT, SEGMENT_WIDTH
    n = budget_for(target, ctx)

    if n == 0:
        return flat_segment(ground_rows=exit_height(ctx.last))

    interior = w - 2
    max_run = params.gap_limit(ctx.physics)
    cap = hazard_capacity(interior, max_run)
    n_enemies = int(math.floor(n * params.enemy_gap_mix + 0.5))
    n_gaps = n - n_enemies
    if n_gaps > cap:
        n_enemies += n_gaps - cap
        n_gaps = cap
    ground_enemies = min(n_enemies, cap - n_gaps)
    perched = n_enemies - ground_enemies
    if perched > w:
        raise InfeasibleTarget(f"target {target} needs {n} hazards, more than placeable")

    hazard = np.zeros(w, dtype=bool)
    hazard[1:-1] = _hazard_layout(rng, n_gaps + ground_enemies, interior, max_run)
    hazard_cols = np.flatnonzero(hazard)
    gap_cols = set(rng.choice(hazard_cols, size=n_gaps, replace=False).tolist()) if n_gaps else set()

    heights = _terrain(rng, exit_height(ctx.last), hazard, params.step_prob)
    grid = np.zeros((h, w), dtype=np.int8)
    for c in range(w):
        if c not in gap_cols:
            grid[h - heights[c] :, c] = TileKind.GROUND
    for c in hazard_cols:
        if c not in gap_cols:
            grid[h - heights[c] - 1, c] = TileKind.ENEMY
    if perched:
        # perches sit above head height, so the safe edge columns may hold them too
        for c in rng.choice(np.arange(w), size=perched, replace=False):
            row = h - heights[c] - 1 - PERCH_CLEARANCE
            grid[row, c] = TileKind.PLATFORM
            grid[row - 1, c] = TileKind.ENEMY
    if params.decorate:
        _decorate(rng, grid, heights, hazard)
    return Segment(grid)


def _decorate(rng: np.random.Generator, grid: np.ndarray, heights: np.ndarray, hazard: np.ndarray) -> None:
    """Coins, short pipes and bare platforms; none of them change difficulty."""
    h, w = grid.shape
    for c in range(2, w - 2):
        stand = h - heights[c] - 1
        free = grid[stand - PERCH_CLEARANCE : stand + 1, c] == TileKind.EMPTY
        roll = rng.random()
        flat_here = heights[c - 1] == heights[c] == heights[c + 1]
        quiet = not hazard[c - 1 : c + 2].any()
        if roll < 0.06 and quiet and flat_here and free.all():
            top = stand - int(rng.integers(0, 2))
            grid[top, c] = TileKind.PIPE_TOP
            grid[top + 1 : stand + 1, c] = TileKind.PIPE_BODY
        elif roll < 0.12 and free.all():
            grid[stand - PERCH_CLEARANCE, c] = TileKind.PLATFORM
        elif roll < 0.22 and free[1:].all():
            grid[stand - 2, c] = TileKind.COIN


def repair(s: Segment, max_gap_width: int = 4) -> Segment:
    """Restore structural invariants; idempotent.

    Over-wide gaps are narrowed, broken pipes are extended to the ground
    (orphaned pipe bodies get a top) and floating enemies are dropped onto
    support or moved onto the nearest solid column.
    """
    grid = s.grid.copy()
    h, w = grid.shape
    for start, length in runs(gap_columns(grid)):
        if length > max_gap_width:
            for c in range(start + max_gap_width, start + length):
                ref = start - 1 if start > 0 else min(start + length, w - 1)
                ground = ground_height(grid, ref) or DEFAULT_GROUND
                grid[h - ground :, c] = TileKind.GROUND
    for r, c in np.argwhere(grid == TileKind.PIPE_BODY):
        if r == 0 or grid[r - 1, c] not in (TileKind.PIPE_TOP, TileKind.PIPE_BODY):
            grid[r, c] = TileKind.PIPE_TOP
    for r, c in np.argwhere(grid == TileKind.PIPE_TOP):
        rr = r + 1
        while rr < h and grid[rr, c] != TileKind.GROUND:
            grid[rr, c] = TileKind.PIPE_BODY
            rr += 1
    solid = solid_mask(grid)
    for r, c in np.argwhere(grid == TileKind.ENEMY):
        if r + 1 < h and solid[r + 1, c]:
            continue
        grid[r, c] = TileKind.EMPTY
        rr = r
        while rr + 1 < h and grid[rr + 1, c] in (TileKind.EMPTY, TileKind.COIN):
            rr += 1
        if rr + 1 < h and solid[rr + 1, c]:
            grid[rr, c] = TileKind.ENEMY
            continue
        spot = _nearest_perch(grid, solid, c)
        if spot is not None:
            grid[spot] = TileKind.ENEMY
    return Segment(grid, s.index)


def _nearest_perch(grid: np.ndarray, solid: np.ndarray, col: int):
    h, w = grid.shape
    for d in range(1, w):
        for c in (col - d, col + d):
            if 0 <= c < w and solid[h - 1, c]:
                r = h - ground_height(grid, c) - 1
                if r >= 0 and grid[r, c] in (TileKind.EMPTY, TileKind.COIN):
                    return r, c
    return None


def fallback_segment(target: float, entry: int, physics: PhysicsParams, max_run: int) -> Segment:
    """Flat ground with evenly spread enemy runs; difficulty <= target."""
    h, w = SEGMENT_HEIGHT, SEGMENT_WIDTH
    run = max(1, min(max_run, physics.max_jump_span))
    cap = hazard_capacity(w - 2, run)
    n = min(int(math.floor(target * w + 1e-9)), cap)
    grid = np.zeros((h, w), dtype=np.int8)
    grid[h - entry :, :] = TileKind.GROUND
    c, placed = 1, 0
    while placed < n:
        for _ in range(min(run, n - placed)):
            grid[h - entry - 1, c] = TileKind.ENEMY
            c += 1
            placed += 1
        c += 1
    return Segment(grid)


def generate_playable(ctx: GeneratorContext, target: float, prev: Optional[Segment] = None,
                      physics: Optional[PhysicsParams] = None) -> GenerationResult:
    """Generate, repair and check until playable after ``prev``.

    After ``max_resamples`` failed attempts a flat enemies-only fallback is
    returned with ``fallback_used`` set. The accepted segment is pushed onto
    the context history.
    """
    physics = physics or ctx.physics
    prev = prev if prev is not None else (ctx.last or flat_segment())
    max_run = ctx.params.gap_limit(physics)
    for attempt in range(ctx.params.max_resamples):
        seg = repair(generate(ctx, target), max(max_run, 0))
        trace = check_playable(prev, seg, physics)
        if trace is not None:
            ctx.push(seg)
            return GenerationResult(seg, attempt, False, trace)
    entry = exit_height(prev)
    seg = fallback_segment(target, entry, physics, max_run)
    trace = check_playable(prev, seg, physics)
    if trace is None:
        seg = fallback_segment(0.0, entry, physics, max_run)
        trace = check_playable(prev, seg, physics)
    ctx.push(seg)
    return GenerationResult(seg, ctx.params.max_resamples, True, trace)
