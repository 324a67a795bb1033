"""One decision of the local-search controller, step by step."""
import numpy as np

from levelsync import (ControllerArchive, ControlState, IdealFeatureSequence, LsKnnParams,
                       estimate_duration, evaluate_candidate, next_target)

u = 0.02322
# ideal curve: easy for 10 s, then hard
f_star = IdealFeatureSequence(np.r_[np.full(430, 0.3), np.full(1000, 0.7)], u)
params = LsKnnParams(time_unit=u, k=3)

# what the player has shown so far: harder segments take longer
archive = ControllerArchive(20)
for f, d in [(0.30, 3.0), (0.32, 3.1), (0.45, 3.4), (0.50, 3.6), (0.62, 3.9), (0.70, 4.2), (0.31, 3.0)]:
    archive.push(f, d)

for f in (0.3, 0.5, 0.7):
    print(f"estimated duration at f={f:.1f}: {estimate_duration(f, archive, params):.2f} s")

# previous segment started at 6.5 s with target 0.3; where will the next one land?
state = ControlState(f_prev=0.3, b_prev=6.5, seed=1)
b_next = state.b_prev + estimate_duration(0.3, archive, params)
print(f"next segment expected to start at {b_next:.2f} s")
for f in (0.3, 0.4, 0.5):
    err = evaluate_candidate(f, b_next, estimate_duration(f, archive, params), f_star)
    print(f"  candidate {f:.1f}: estimated error {err:.4f}")

choice = next_target(state, archive, f_star, params)
print(f"local search picks {choice:.4f}")

# without an archive the controller falls back to the nominal duration
print("cold start estimate:", estimate_duration(0.5, ControllerArchive(), params))
