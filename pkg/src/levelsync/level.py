"""Tile-grid level segments, the difficulty feature and segment comparisons."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDimensions, UnknownTile

SEGMENT_HEIGHT = 14
SEGMENT_WIDTH = 28
PATTERN_SMOOTHING = 1e-6


class TileKind(IntEnum):
    EMPTY = 0
    GROUND = 1
    PLATFORM = 2
    ENEMY = 3
    COIN = 4
    PIPE_TOP = 5
    PIPE_BODY = 6

    @property
    def char(self) -> str:
        return TILE_CHARS[self]

    @property
    def solid(self) -> bool:
        return self in SOLID_KINDS


TILE_CHARS = {
    TileKind.EMPTY: "-",
    TileKind.GROUND: "X",
    TileKind.PLATFORM: "S",
    TileKind.ENEMY: "E",
    TileKind.COIN: "o",
    TileKind.PIPE_TOP: "T",
    TileKind.PIPE_BODY: "t",
}
CHAR_TILES = {c: k for k, c in TILE_CHARS.items()}
SOLID_KINDS = frozenset({TileKind.GROUND, TileKind.PLATFORM, TileKind.PIPE_TOP, TileKind.PIPE_BODY})
N_KINDS = len(TileKind)

# lookup tables indexed by tile code
_SOLID_LUT = np.array([k in SOLID_KINDS for k in TileKind], dtype=bool)
_CHAR_LUT = np.array([TILE_CHARS[k] for k in TileKind])


def solid_mask(grid: np.ndarray) -> np.ndarray:
    return _SOLID_LUT[grid]


@dataclass(frozen=True)
class FeatureBounds:
    f_min: float = 0.0
    f_max: float = 1.0

    def __post_init__(self):
        if not self.f_min < self.f_max:
            raise ValueError(f"f_min must be < f_max, got {self.f_min}, {self.f_max}")

    @property
    def span(self) -> float:
        return self.f_max - self.f_min

    def clamp(self, f: float) -> float:
        return min(max(f, self.f_min), self.f_max)


class Segment:
    """An immutable 14x28 tile grid.

    ``index`` is the ordinal of the segment within a level (0 for a spawn
    segment that precedes generated content).
    """

    __slots__ = ("grid", "index")

    def __init__(self, grid, index: int = 0):
        arr = np.array(grid, dtype=np.int8)
        if arr.shape != (SEGMENT_HEIGHT, SEGMENT_WIDTH):
            raise BadDimensions(*arr.shape) if arr.ndim == 2 else BadDimensions(arr.size, 0)
        if arr.min() < 0 or arr.max() >= N_KINDS:
            r, c = np.argwhere((arr < 0) | (arr >= N_KINDS))[0]
            raise UnknownTile(int(arr[r, c]), int(r), int(c))
        arr.flags.writeable = False
        object.__setattr__(self, "grid", arr)
        object.__setattr__(self, "index", int(index))

    def __setattr__(self, name, value):
        raise AttributeError("Segment is immutable")

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    def with_index(self, index: int) -> "Segment":
        return Segment(self.grid, index)

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash(self.grid.tobytes())

    def __repr__(self):
        return f"Segment(index={self.index}, difficulty={difficulty(self):.4f})"

    def to_text(self) -> str:
        return grid_to_text(self.grid)


def flat_segment(ground_rows: int = 2, index: int = 0) -> Segment:
    grid = np.zeros((SEGMENT_HEIGHT, SEGMENT_WIDTH), dtype=np.int8)
    grid[SEGMENT_HEIGHT - ground_rows:, :] = TileKind.GROUND
    return Segment(grid, index)


def concat(segments: Iterable[Segment]) -> np.ndarray:
    return np.concatenate([s.grid for s in segments], axis=1)


def gap_columns(grid: np.ndarray) -> np.ndarray:
    """Boolean mask of columns whose bottom cell has no solid tile."""
    return ~solid_mask(grid[-1])


def difficulty(s: Segment | np.ndarray) -> float:
    """(enemies + empty ground columns) / width."""
    grid = s.grid if isinstance(s, Segment) else s
    n_enemies = int(np.count_nonzero(grid == TileKind.ENEMY))
    n_gaps = int(np.count_nonzero(gap_columns(grid)))
    return (n_enemies + n_gaps) / grid.shape[1]


def pattern_counts(grid: np.ndarray) -> dict[int, int]:
    """Histogram of 2x2 tile patterns, keyed by a base-N_KINDS code."""
    g = grid.astype(np.int64)
    codes = (
        g[:-1, :-1] * N_KINDS**3 + g[:-1, 1:] * N_KINDS**2 + g[1:, :-1] * N_KINDS + g[1:, 1:]
    )
    keys, counts = np.unique(codes, return_counts=True)
    return dict(zip(keys.tolist(), counts.tolist()))


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def tile_pattern_divergence(a: Segment | np.ndarray, b: Segment | np.ndarray,
                            eps: float = PATTERN_SMOOTHING) -> float:
    """Symmetrised KL divergence between smoothed 2x2 tile-pattern distributions."""
    ga = a.grid if isinstance(a, Segment) else a
    gb = b.grid if isinstance(b, Segment) else b
    if ga.shape != gb.shape:
        raise BadDimensions(*gb.shape)
    ca, cb = pattern_counts(ga), pattern_counts(gb)
    support = sorted(set(ca) | set(cb))
    p = np.array([ca.get(k, 0) for k in support], dtype=float) + eps
    q = np.array([cb.get(k, 0) for k in support], dtype=float) + eps
    p /= p.sum()
    q /= q.sum()
    return max(0.0, 0.5 * (_kl(p, q) + _kl(q, p)))


def tile_difference_ratio(a: Segment | np.ndarray, b: Segment | np.ndarray) -> float:
    ga = a.grid if isinstance(a, Segment) else a
    gb = b.grid if isinstance(b, Segment) else b
    if ga.shape != gb.shape:
        raise BadDimensions(*gb.shape)
    return float(np.count_nonzero(ga != gb)) / ga.size


def validate(s: Segment | np.ndarray, max_gap_width: int | None = None) -> list[str]:
    """List the structural problems of a segment; empty when it is well formed.

    Checks floating enemies, broken pipes and (optionally) gap runs wider
    than ``max_gap_width``.
    """
    grid = s.grid if isinstance(s, Segment) else s
    h, w = grid.shape
    solid = solid_mask(grid)
    issues = []
    for r, c in np.argwhere(grid == TileKind.ENEMY):
        if r + 1 >= h or not solid[r + 1, c]:
            issues.append(f"floating enemy at ({r}, {c})")
    for r, c in np.argwhere(grid == TileKind.PIPE_TOP):
        if not _pipe_grounded(grid, r, c):
            issues.append(f"broken pipe at ({r}, {c})")
    for r, c in np.argwhere(grid == TileKind.PIPE_BODY):
        above = grid[r - 1, c] if r > 0 else TileKind.EMPTY
        if above not in (TileKind.PIPE_TOP, TileKind.PIPE_BODY):
            issues.append(f"orphan pipe body at ({r}, {c})")
    if max_gap_width is not None:
        for start, length in runs(gap_columns(grid)):
            if length > max_gap_width:
                issues.append(f"gap of width {length} at column {start}")
    return issues


def _pipe_grounded(grid: np.ndarray, r: int, c: int) -> bool:
    h = grid.shape[0]
    r += 1
    while r < h and grid[r, c] == TileKind.PIPE_BODY:
        r += 1
    return r == h or grid[r, c] == TileKind.GROUND


def runs(mask: Sequence[bool]) -> list[tuple[int, int]]:
    """(start, length) of each maximal run of True values."""
    out = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            out.append((start, i - start))
            start = None
    if start is not None:
        out.append((start, len(mask) - start))
    return out


def grid_to_text(grid: np.ndarray) -> str:
    return "\n".join("".join(row) for row in _CHAR_LUT[grid]) + "\n"


def parse_level(text: str) -> list[Segment]:
    """Parse a level text into consecutive segments (left to right)."""
    rows = text.splitlines()
    if len(rows) != SEGMENT_HEIGHT:
        raise BadDimensions(len(rows), len(rows[0]) if rows else 0)
    width = len(rows[0])
    if width == 0 or width % SEGMENT_WIDTH or any(len(r) != width for r in rows):
        raise BadDimensions(len(rows), max(len(r) for r in rows))
    grid = np.empty((SEGMENT_HEIGHT, width), dtype=np.int8)
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            kind = CHAR_TILES.get(ch)
            if kind is None:
                raise UnknownTile(ch, r, c)
            grid[r, c] = kind
    return [
        Segment(grid[:, k : k + SEGMENT_WIDTH], index=i)
        for i, k in enumerate(range(0, width, SEGMENT_WIDTH), start=1)
    ]


def serialize_level(segments: Sequence[Segment]) -> str:
    return grid_to_text(concat(segments))
