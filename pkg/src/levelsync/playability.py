"""Search-based traversability check for concatenated segment pairs.

The agent is one tile tall and stands on any solid tile. From a standing
cell it can

* walk one column left or right, dropping straight down if nothing is
  underneath, or
* jump: rise ``h`` rows in place (``1 <= h <= max_jump_height``), travel
  ``|dx|`` columns at that height (``1 <= |dx| <= max_jump_span + 1``) and
  drop straight down until it lands.

Every cell the agent passes through must be EMPTY or COIN; enemies block
movement and landing but can be jumped over. Dropping out of the bottom row
is fatal. A pair of segments is playable when some standing cell in the
rightmost column can be reached from a standing cell in the leftmost one.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import NoStandableStart
from .level import Segment, TileKind, flat_segment, solid_mask


@dataclass(frozen=True)
class PhysicsParams:
    max_jump_height: int = 4
    max_jump_span: int = 6
    walk_speed: float = 6.0
    run_speed: float = 10.0

    def __post_init__(self):
        if self.max_jump_height < 1 or self.max_jump_span < 1:
            raise ValueError("jump height and span must be >= 1")
        if self.walk_speed <= 0 or self.run_speed <= 0:
            raise ValueError("speeds must be positive")

    @property
    def max_jump_dx(self) -> int:
        # landing column sits one past the widest clearable gap
        return self.max_jump_span + 1

    @property
    def walk_jump_span(self) -> int:
        """Widest gap clearable without a run-up."""
        return max(1, int(self.max_jump_span * min(1.0, self.walk_speed / self.run_speed)))


class Action(str, Enum):
    WALK = "WALK"
    RUN = "RUN"
    JUMP = "JUMP"


@dataclass(frozen=True)
class TraceState:
    column: int
    row: int
    action: Action
    arc: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Trace:
    states: tuple[TraceState, ...]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def columns(self) -> list[int]:
        return [s.column for s in self.states]


class _Terrain:
    """Passability and landing tables for one grid."""

    def __init__(self, grid: np.ndarray):
        h, w = grid.shape
        solid = solid_mask(grid)
        passable = ~solid & (grid != TileKind.ENEMY)
        standable = np.zeros_like(passable)
        standable[:-1] = passable[:-1] & solid[1:]
        # landing[r, c]: row where a drop starting in (r, c) comes to rest, -1 if fatal
        landing = np.full((h, w), -1, dtype=np.int64)
        for r in range(h - 1, -1, -1):
            below = landing[r + 1] if r + 1 < h else np.full(w, -1)
            landing[r] = np.where(standable[r], r, np.where(passable[r], below, -1))
        self.h, self.w = h, w
        self.passable = passable.tolist()
        self.standable = standable
        self.landing = landing.tolist()


def _moves(t: _Terrain, r: int, c: int, physics: PhysicsParams):
    """Yield (row, col, action, arc, cost) for every move out of standing cell (r, c)."""
    passable, landing = t.passable, t.landing
    for d in (1, -1):
        nc = c + d
        if 0 <= nc < t.w and passable[r][nc]:
            lr = landing[r][nc]
            if lr >= 0:
                yield lr, nc, Action.WALK, (), 1
    for hgt in range(1, physics.max_jump_height + 1):
        ar = r - hgt
        if ar < 0 or not passable[ar][c]:
            break
        for d in (1, -1):
            for dx in range(1, physics.max_jump_dx + 1):
                nc = c + d * dx
                if not 0 <= nc < t.w or not passable[ar][nc]:
                    break
                lr = landing[ar][nc]
                if lr >= 0:
                    yield lr, nc, Action.JUMP, (hgt, d * dx), dx + 1 + 0.01 * dx * dx


def _arc_cells(r: int, c: int, hgt: int, dx: int, land_row: int) -> tuple[tuple[int, int], ...]:
    step = 1 if dx > 0 else -1
    cells = [(c, r - k) for k in range(1, hgt + 1)]
    cells += [(c + step * k, r - hgt) for k in range(1, abs(dx) + 1)]
    cells += [(c + dx, rr) for rr in range(r - hgt + 1, land_row + 1)]
    return tuple(cells)


def standable_starts(grid: np.ndarray) -> list[int]:
    """Rows of the leftmost column the agent can stand in."""
    return [int(r) for r in np.flatnonzero(_Terrain(grid).standable[:, 0])]


def solve(grid: np.ndarray, physics: PhysicsParams = PhysicsParams()) -> Optional[Trace]:
    """Find a left-to-right traversal of an arbitrary tile grid.

    Returns ``None`` when the right edge is unreachable. Raises
    NoStandableStart when the left edge has no standing cell at all.
    """
    t = _Terrain(np.asarray(grid))
    starts = np.flatnonzero(t.standable[:, 0]).tolist()
    if not starts:
        raise NoStandableStart("left edge has no solid support")
    goal = t.w - 1
    # A*: every move costs at least the columns it advances, so remaining
    # columns is an admissible heuristic; jump cost is convex in distance so
    # short hops win ties
    heap = []
    counter = 0
    best = {}
    parent = {}
    for r in starts:
        node = (r, 0)
        best[node] = 0
        parent[node] = None
        heapq.heappush(heap, (goal, goal, counter, 0, node))
        counter += 1
    while heap:
        _, _, _, g, node = heapq.heappop(heap)
        if g > best[node]:
            continue
        r, c = node
        if c == goal:
            return _reconstruct(node, parent, physics)
        for nr, nc, action, arc, cost in _moves(t, r, c, physics):
            ng = g + cost
            nxt = (nr, nc)
            if ng < best.get(nxt, 1 << 30):
                best[nxt] = ng
                parent[nxt] = (node, action, arc)
                hrem = goal - nc
                heapq.heappush(heap, (ng + hrem, hrem, counter, ng, nxt))
                counter += 1
    return None


def _reconstruct(node, parent, physics: PhysicsParams) -> Trace:
    chain = []
    while parent[node] is not None:
        prev, action, arc = parent[node]
        chain.append((node, action, arc, prev))
        node = prev
    states = [TraceState(node[1], node[0], Action.WALK)]
    for (r, c), action, arc, (pr, pc) in reversed(chain):
        if action is Action.JUMP:
            hgt, dx = arc
            if abs(dx) - 1 > physics.walk_jump_span and states[-1].action is Action.WALK:
                last = states[-1]
                states[-1] = TraceState(last.column, last.row, Action.RUN)
            states.append(TraceState(c, r, Action.JUMP, _arc_cells(pr, pc, hgt, dx, r)))
        else:
            states.append(TraceState(c, r, action))
    return Trace(tuple(states))


def check_playable(prev: Segment, nxt: Segment,
                   physics: PhysicsParams = PhysicsParams()) -> Optional[Trace]:
    """Traverse ``prev + nxt``; a Trace when playable, ``None`` otherwise."""
    if prev.grid.shape != nxt.grid.shape:
        raise ValueError("segments must share dimensions")
    return solve(np.concatenate([prev.grid, nxt.grid], axis=1), physics)


def check_first(segment: Segment, physics: PhysicsParams = PhysicsParams(),
                apron: Optional[Segment] = None) -> Optional[Trace]:
    """Check a segment that has no predecessor by prefixing a flat spawn apron."""
    return check_playable(apron if apron is not None else flat_segment(), segment, physics)


def playability_reward(trace: Optional[Trace]) -> int:
    """0 when playable, -1 otherwise."""
    return 0 if trace is not None else -1
