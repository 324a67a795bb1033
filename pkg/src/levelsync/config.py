"""Run configuration and music sources.

Config files use flat ``[section]`` blocks of ``key = value`` pairs::

    [run]
    seed = 1
    segments = 50
    agent = steady

    [music]
    source = square
    low = 0.2
    high = 0.8
    period = 30
    length = 120

    [controller]
    trials = 50

    [generator]
    outer_noise_sd = 0.03

    [physics]
    max_jump_height = 4

    [agent.sprinter]
    base_speed = 14

Named music sections (``[music.<name>]``) are used by batch experiments.
Every key is optional; see the dataclass defaults below.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .agents import DEFAULT_AGENTS, AgentProfile, median_base_speed
from .audio import DEFAULT_SMOOTHING_WINDOW, DEFAULT_TIME_UNIT, IdealFeatureSequence, analyze_music, read_wav
from .controller import LsKnnParams
from .errors import ConfigError
from .generator import GeneratorParams
from .level import SEGMENT_WIDTH, FeatureBounds
from .metrics import synthetic_target_walk
from .playability import PhysicsParams

MUSIC_KINDS = ("wav", "csv", "constant", "square", "sine", "walk")
POLICIES = ("lsknn", "constant", "nominal")


@dataclass(frozen=True)
class MusicSource:
    """Where the ideal feature sequence comes from.

    ``wav`` and ``csv`` read ``path``; the synthetic kinds build a sequence of
    ``length`` seconds at ``time_unit`` resolution.
    """

    source: str = "square"
    name: str = ""
    path: Optional[str] = None
    value: float = 0.5
    low: float = 0.2
    high: float = 0.8
    period: float = 30.0
    amplitude: float = 0.3
    length: float = 120.0
    sigma: float = 0.05
    hold: float = 1.0
    seed: int = 0
    time_unit: float = DEFAULT_TIME_UNIT
    window: int = DEFAULT_SMOOTHING_WINDOW

    def __post_init__(self):
        if self.source not in MUSIC_KINDS:
            raise ConfigError(f"unknown music source {self.source!r}; expected one of {MUSIC_KINDS}")
        if self.source in ("wav", "csv") and not self.path:
            raise ConfigError(f"music source {self.source!r} needs a path")

    @property
    def label(self) -> str:
        return self.name or (Path(self.path).stem if self.path else self.source)

    def build(self) -> IdealFeatureSequence:
        if self.source == "wav":
            return analyze_music(read_wav(self.path), window=self.window)
        if self.source == "csv":
            return IdealFeatureSequence.load_csv(self.path)
        n = max(1, int(round(self.length / self.time_unit)))
        t = np.arange(n) * self.time_unit
        if self.source == "constant":
            values = np.full(n, self.value)
        elif self.source == "square":
            phase = np.floor(t / (self.period / 2)).astype(int) % 2
            values = np.where(phase == 0, self.high, self.low)
        elif self.source == "sine":
            values = self.value + self.amplitude * np.sin(2 * np.pi * t / self.period)
        else:
            steps = synthetic_target_walk(self.seed, math.ceil(self.length / self.hold) + 1, self.sigma)
            values = steps[(t / self.hold).astype(int)]
        return IdealFeatureSequence(np.clip(values, 0.0, 1.0), self.time_unit)


@dataclass(frozen=True)
class ControllerConfig:
    policy: str = "lsknn"
    trials: int = 50
    k: int = 5
    sigma: float = 0.02
    archive_size: int = 20
    nominal_duration: Optional[float] = None
    exhaustion: str = "hold"
    snap: bool = True
    constant_value: Optional[float] = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if self.archive_size < 1:
            raise ConfigError("archive_size must be >= 1")
        try:
            self.params(DEFAULT_TIME_UNIT)
        except ValueError as exc:
            raise ConfigError(f"[controller] {exc}") from None

    def params(self, time_unit: float, agents=None, bounds: FeatureBounds = FeatureBounds()) -> LsKnnParams:
        nominal = self.nominal_duration or SEGMENT_WIDTH / median_base_speed(agents)
        return LsKnnParams(
            trials=self.trials, k=self.k, sigma=self.sigma, nominal_duration=nominal,
            bounds=bounds, time_unit=time_unit, exhaustion=self.exhaustion,
            resolution=1.0 / SEGMENT_WIDTH if self.snap else None,
            archive_size=self.archive_size,
        )


@dataclass(frozen=True)
class RunConfig:
    music: MusicSource = field(default_factory=MusicSource)
    agent: str = "steady"
    agents: dict = field(default_factory=lambda: dict(DEFAULT_AGENTS))
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    generator: GeneratorParams = field(default_factory=lambda: GeneratorParams(outer_noise_sd=0.03))
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    segments: Optional[int] = 50
    stop_at_music_end: bool = False
    seed: int = 0
    recheck: bool = True
    output: Optional[str] = None
    musics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.segments is None and not self.stop_at_music_end and self.controller.exhaustion != "terminate":
            raise ConfigError("need a segment count or stop_at_music_end")
        if self.segments is not None and self.segments < 1:
            raise ConfigError("segments must be >= 1")
        if self.agent not in self.agents:
            raise ConfigError(f"unknown agent {self.agent!r}; known: {sorted(self.agents)}")

    @property
    def profile(self) -> AgentProfile:
        return self.agents[self.agent]

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def oracle(self) -> "RunConfig":
        return replace(self, generator=replace(self.generator, outer_noise_sd=0.0))

    def describe(self) -> dict:
        """JSON-ready echo of the settings that determine a run."""
        return {
            "seed": self.seed,
            "agent": dataclasses.asdict(self.profile),
            "music": dataclasses.asdict(self.music),
            "controller": dataclasses.asdict(self.controller),
            "generator": dataclasses.asdict(self.generator),
            "physics": dataclasses.asdict(self.physics),
            "segments": self.segments,
            "stop_at_music_end": self.stop_at_music_end,
        }


def _convert(cls, section: configparser.SectionProxy, where: str, extra=()):
    known = {f.name: f for f in fields(cls)}
    out = {}
    for key, raw in section.items():
        if key in extra:
            continue
        if key not in known:
            raise ConfigError(f"[{where}] unknown key {key!r}")
        out[key] = _parse_value(known[key].type, raw, f"[{where}] {key}")
    return out


def _parse_value(type_name, raw: str, where: str):
    t = str(type_name)
    raw = raw.strip()
    try:
        if "Optional" in t and raw.lower() in ("", "none", "auto"):
            return None
        if "bool" in t:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in t:
            return int(raw)
        if "float" in t:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {t}") from None
    return raw


def load_config(path=None, text: Optional[str] = None) -> RunConfig:
    """Read a run configuration from a file path or a string."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        if text is not None:
            cp.read_string(text)
        else:
            with open(path) as fh:
                cp.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    base = Path(path).parent if path is not None else Path(".")
    kw = {}
    try:
        if cp.has_section("run"):
            kw.update(_convert(RunConfig, cp["run"], "run", extra=("music",)))
        if cp.has_section("controller"):
            kw["controller"] = ControllerConfig(**_convert(ControllerConfig, cp["controller"], "controller"))
        if cp.has_section("generator"):
            kw["generator"] = GeneratorParams(**_convert(GeneratorParams, cp["generator"], "generator"))
        if cp.has_section("physics"):
            kw["physics"] = PhysicsParams(**_convert(PhysicsParams, cp["physics"], "physics"))
        agents = dict(DEFAULT_AGENTS)
        musics = {}
        for name in cp.sections():
            if name.startswith("agent."):
                aname = name.split(".", 1)[1]
                values = _convert(AgentProfile, cp[name], name, extra=("name",))
                old = agents.get(aname)
                agents[aname] = replace(old, **values) if old else AgentProfile(name=aname, **values)
            elif name.startswith("music."):
                mname = name.split(".", 1)[1]
                musics[mname] = _music(cp[name], name, base, mname)
        kw["agents"] = agents
        kw["musics"] = musics
        if cp.has_section("music"):
            kw["music"] = _music(cp["music"], "music", base, "")
        elif cp.has_option("run", "music"):
            mname = cp["run"]["music"].strip()
            if mname not in musics:
                raise ConfigError(f"[run] music {mname!r} has no [music.{mname}] section")
            kw["music"] = musics[mname]
        elif musics:
            kw["music"] = next(iter(musics.values()))
        return RunConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _music(section, where: str, base: Path, name: str) -> MusicSource:
    values = _convert(MusicSource, section, where)
    values.setdefault("name", name)
    if values.get("path"):
        p = Path(values["path"])
        values["path"] = str(p if p.is_absolute() else base / p)
    return MusicSource(**values)
