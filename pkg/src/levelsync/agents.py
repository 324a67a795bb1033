"""Simulated players with distinct speed profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .level import Segment, difficulty
from .playability import PhysicsParams, Trace, check_playable


@dataclass(frozen=True)
class AgentProfile:
    """Timing model of a player.

    A playable segment takes ``width / base_speed * (1 + slowdown * difficulty)``
    seconds, multiplied by lognormal jitter ``exp(N(0, noise_sd**2))``.
    """

    name: str
    base_speed: float
    slowdown: float = 0.5
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_speed <= 0:
            raise ValueError("base_speed must be positive")
        if self.slowdown < 0 or self.noise_sd < 0:
            raise ValueError("slowdown and noise_sd must be non-negative")

    def mean_duration(self, width: int, feature: float) -> float:
        return width / self.base_speed * (1.0 + self.slowdown * feature)


DEFAULT_AGENTS = {
    a.name: a
    for a in (
        AgentProfile("fast", base_speed=12.0, slowdown=0.3, noise_sd=0.05),
        AgentProfile("steady", base_speed=10.0, slowdown=0.5, noise_sd=0.02),
        AgentProfile("cautious", base_speed=8.0, slowdown=1.2, noise_sd=0.05),
        AgentProfile("erratic", base_speed=9.0, slowdown=0.6, noise_sd=0.2),
        AgentProfile("slow", base_speed=6.0, slowdown=0.8, noise_sd=0.05),
    )
}


def median_base_speed(agents=None) -> float:
    agents = DEFAULT_AGENTS.values() if agents is None else agents
    return float(np.median([a.base_speed for a in agents]))


@dataclass(frozen=True)
class PlayResult:
    playable: bool
    duration: float
    trace: Optional[Trace] = None


@dataclass
class Player:
    """An agent profile bound to its own random stream; not thread-safe."""

    profile: AgentProfile
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    rng: np.random.Generator = None

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.profile.seed)

    def play(self, prev: Segment, nxt: Segment, trace: Optional[Trace] = None) -> PlayResult:
        if trace is None:
            trace = check_playable(prev, nxt, self.physics)
        if trace is None:
            return PlayResult(False, 0.0, None)
        p = self.profile
        base = p.mean_duration(nxt.width, difficulty(nxt))
        jitter = math.exp(self.rng.normal(0.0, p.noise_sd)) if p.noise_sd > 0 else 1.0
        return PlayResult(True, base * jitter, trace)


def play(agent: AgentProfile | Player, prev: Segment, nxt: Segment,
         physics: PhysicsParams = PhysicsParams(), trace: Optional[Trace] = None) -> PlayResult:
    """One play-through of ``nxt`` (entered from ``prev``)."""
    player = agent if isinstance(agent, Player) else Player(agent, physics)
    return player.play(prev, nxt, trace)
