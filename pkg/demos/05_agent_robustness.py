"""Same music, five players with different speeds."""
import numpy as np

from levelsync import DEFAULT_AGENTS, MusicSource, RunConfig, run_online
from levelsync.config import ControllerConfig

music = MusicSource("square", low=0.35, high=0.65, period=40, length=80)
print(f"{'agent':>9} {'speed':>5} {'s/segment':>9} {'1-eps_all':>9} {'constant':>9}")
for name, profile in DEFAULT_AGENTS.items():
    q, d, c = [], [], []
    for seed in range(1, 6):
        cfg = RunConfig(music=music, agent=name, seed=seed, segments=None, stop_at_music_end=True)
        rep = run_online(cfg)
        q.append(1 - rep.eps_all)
        d.append(rep.total_time / len(rep.records))
        base = run_online(cfg.with_(controller=ControllerConfig(policy="constant")))
        c.append(1 - base.eps_all)
    print(f"{name:>9} {profile.base_speed:5.0f} {np.mean(d):9.2f} {np.mean(q):9.4f} {np.mean(c):9.4f}")
# slow players see fewer, longer segments, yet tracking quality stays level
