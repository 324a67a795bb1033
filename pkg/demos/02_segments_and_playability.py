"""Generating segments at a target difficulty and checking that they can be played."""
from levelsync import (Action, GeneratorContext, check_playable, difficulty, flat_segment,
                       generate_playable, repair)
from levelsync.level import Segment, TileKind

# difficulty = (enemies + gap columns) / 28
ctx = GeneratorContext(seed=7)
prev = flat_segment()
for target in (0.1, 0.5, 0.9):
    res = generate_playable(ctx, target, prev)
    print(f"target {target:.2f} -> difficulty {difficulty(res.segment):.4f} "
          f"({round(difficulty(res.segment) * 28)} hazards, {res.resamples} resamples)")
    print(res.segment.to_text())
    prev = res.segment

# the solver returns a trace of standing positions over the 56-column pair
trace = check_playable(flat_segment(), prev)
jumps = [s for s in trace if s.action is Action.JUMP]
runs = [s for s in trace if s.action is Action.RUN]
print(f"trace: {len(trace)} states, {len(jumps)} jumps, {len(runs)} run-ups")

# an over-wide gap is not playable...
g = flat_segment().grid.copy()
g[:, 8:16] = TileKind.EMPTY
wide = Segment(g)
print("8-wide gap playable?", check_playable(flat_segment(), wide) is not None)
# ...and repair narrows it to the configured limit
fixed = repair(wide, max_gap_width=4)
print("after repair:", check_playable(flat_segment(), fixed) is not None,
      "difficulty", round(difficulty(fixed), 4))
