"""The online controller -> generator -> player loop and run persistence."""

from __future__ import annotations

import csv
import io
import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .agents import Player
from .audio import IdealFeatureSequence
from .config import RunConfig
from .controller import ConstantController, LsKnnController, ideal_values, window_indices
from .errors import EmptyRun, FallbackOveruse
from .generator import GeneratorContext, generate_playable
from .level import FeatureBounds, Segment, difficulty, flat_segment, parse_level, serialize_level
from .metrics import RunReport, SegmentRecord, summarize

FALLBACK_WARN_FRACTION = 0.10
REPORT_VERSION = 1


class PipelineError(RuntimeError):
    """A segment that passed the resampling check failed during play."""


@dataclass
class Timeline:
    """Clock and per-segment bookkeeping for one run.

    Segment i is generated while segment i-1 is being played, so only the
    durations of segments up to i-2 are known when target i is chosen.
    """

    clock: float = 0.0
    targets: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    durations: list = field(default_factory=list)
    resamples: list = field(default_factory=list)
    fallbacks: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    def complete(self, duration: float) -> float:
        """Finish the oldest unplayed segment; returns the next start time."""
        self.durations.append(duration)
        self.clock += duration
        return self.clock


def _seeds(seed: int, n: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(n)]


def make_controller(config: RunConfig, f_star: IdealFeatureSequence, seed: int):
    params = config.controller.params(f_star.time_unit, config.agents.values())
    policy = config.controller.policy
    if policy == "constant":
        value = config.controller.constant_value
        if value is None:
            value = float(np.mean(f_star.values))
        return ConstantController(value, params)
    if policy == "nominal":
        return LsKnnController(params, seed, estimator=lambda f: params.nominal_duration)
    return LsKnnController(params, seed)


def run_online(config: RunConfig, f_star: Optional[IdealFeatureSequence] = None) -> RunReport:
    """Simulate one online generation session and return its report."""
    f_star = f_star if f_star is not None else config.music.build()
    ctrl_seed, gen_seed, agent_seed = _seeds(config.seed, 3)
    bounds = FeatureBounds()
    controller = make_controller(config, f_star, ctrl_seed)
    gen = GeneratorContext(seed=gen_seed, bounds=bounds, params=config.generator, physics=config.physics)
    player = Player(config.profile, config.physics, np.random.default_rng([agent_seed, config.profile.seed]))

    spawn = flat_segment(index=0)
    gen.push(spawn)
    tl = Timeline()
    latencies = []
    music_end = f_star.duration
    limit = config.segments
    # running out of music under the "terminate" policy ends the run like the stop rule
    stop_at_end = config.stop_at_music_end or config.controller.exhaustion == "terminate"

    def play_oldest():
        j = len(tl.durations)  # 0-based index of the segment being completed
        prev = tl.segments[j - 1] if j > 0 else spawn
        trace = None if config.recheck else tl.traces[j]
        result = player.play(prev, tl.segments[j], trace)
        if not result.playable:
            raise PipelineError(f"segment {j + 1} passed resampling but is unplayable")
        return tl.complete(result.duration)

    i = 1
    while True:
        t0 = time.perf_counter()
        target = controller.start(f_star) if i == 1 else controller.propose(f_star)
        prev = tl.segments[-1] if tl.segments else spawn
        res = generate_playable(gen, target, prev, config.physics)
        latencies.append(time.perf_counter() - t0)

        tl.targets.append(target)
        tl.segments.append(res.segment.with_index(i))
        tl.starts.append(None)
        tl.resamples.append(res.resamples)
        tl.fallbacks.append(res.fallback_used)
        tl.traces.append(res.trace)

        if i > 1:
            start_i = play_oldest()
            tl.starts[i - 1] = start_i
            controller.observe(tl.targets[i - 2], tl.durations[-1], start_i)
            if stop_at_end and start_i >= music_end:
                # segment i would start after the music ends; it is never played
                for lst in (tl.targets, tl.segments, tl.starts, tl.resamples, tl.fallbacks, tl.traces):
                    lst.pop()
                break
        else:
            tl.starts[0] = 0.0
        if limit is not None and i >= limit:
            break
        i += 1
    while len(tl.durations) < len(tl.segments):
        play_oldest()

    records = [
        SegmentRecord(
            index=k + 1, target=float(tl.targets[k]), feature=difficulty(tl.segments[k]),
            start=float(tl.starts[k]), duration=float(tl.durations[k]), playable=True,
            resamples=int(tl.resamples[k]), fallback=bool(tl.fallbacks[k]),
        )
        for k in range(len(tl.segments))
    ]
    n_fallback = sum(tl.fallbacks)
    if n_fallback > FALLBACK_WARN_FRACTION * len(records):
        warnings.warn(f"{n_fallback} of {len(records)} segments used the fallback layout", FallbackOveruse)
    report = RunReport(records=records, f_star=f_star, bounds=bounds, segments=list(tl.segments),
                       meta=config.describe(), latencies=latencies)
    return summarize(report, config.controller.exhaustion if config.controller.exhaustion != "terminate" else "hold")


def _metrics_dict(report: RunReport) -> dict:
    return {
        "eps_inner": report.eps_inner,
        "eps_outer": report.eps_outer,
        "eps_all": report.eps_all,
        "playability_rate": report.playability_rate,
        "fun_distance": report.fun_distance,
        "total_time": report.total_time,
    }


def report_to_json(report: RunReport) -> str:
    doc = {
        "version": REPORT_VERSION,
        "meta": report.meta,
        "bounds": asdict(report.bounds),
        "time_unit": report.f_star.time_unit,
        "f_star": report.f_star.values.tolist(),
        "records": [asdict(r) for r in report.records],
        "metrics": _metrics_dict(report),
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def targets_csv(report: RunReport) -> str:
    """Per-time-unit f*, target and achieved feature aligned on the play timeline."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_index", "time_s", "f_star", "f_hat", "f"])
    fs = report.f_star
    for r in report.records:
        lo, hi = window_indices(r.start, r.duration, fs.time_unit)
        vals = ideal_values(fs, lo, hi) if hi > lo else []
        for t, v in zip(range(lo, hi), vals):
            w.writerow([t, repr(round(t * fs.time_unit, 9)), repr(float(v)), repr(r.target), repr(r.feature)])
    return buf.getvalue()


def export_report(report: RunReport, directory) -> Path:
    """Write run.json, level.lvl and targets.csv into ``directory``."""
    if not report.records:
        raise EmptyRun("nothing to export")
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        (d / "run.json").write_text(report_to_json(report))
        (d / "level.lvl").write_text(serialize_level(report.segments) if report.segments else "")
        (d / "targets.csv").write_text(targets_csv(report))
    except OSError as exc:
        raise OSError(f"cannot write run artifacts to {d}: {exc}") from exc
    return d


def report_from_json(text: str, segments: Optional[list[Segment]] = None) -> RunReport:
    doc = json.loads(text)
    if not doc.get("records"):
        raise EmptyRun("report has no records")
    m = doc.get("metrics", {})
    return RunReport(
        records=[SegmentRecord(**r) for r in doc["records"]],
        f_star=IdealFeatureSequence(np.array(doc["f_star"], dtype=float), doc["time_unit"]),
        bounds=FeatureBounds(**doc["bounds"]),
        eps_inner=m.get("eps_inner", 0.0),
        eps_outer=m.get("eps_outer", 0.0),
        eps_all=m.get("eps_all", 0.0),
        playability_rate=m.get("playability_rate", 1.0),
        fun_distance=m.get("fun_distance"),
        segments=segments or [],
        meta=doc.get("meta", {}),
    )


def load_report(path) -> RunReport:
    """Read a report from a run directory (or a run.json path)."""
    p = Path(path)
    run_json = p / "run.json" if p.is_dir() else p
    level = run_json.parent / "level.lvl"
    segments = parse_level(level.read_text()) if level.exists() and level.stat().st_size else None
    return report_from_json(run_json.read_text(), segments)
