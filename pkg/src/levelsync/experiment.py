"""Batch experiments: agents x musics x seeds, aggregated per cell."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import MusicSource, RunConfig
from .metrics import RunReport, diversity
from .online import run_online

METRICS = (
    "fun_sqrt",
    "fun_distance",
    "unplayable_rate",
    "resample_rate",
    "eps_inner",
    "eps_outer",
    "eps_all",
    "total_time",
    "mean_duration",
)


def run_metrics(report: RunReport) -> dict:
    n = len(report.records)
    return {
        "fun_sqrt": report.fun_sqrt if report.fun_sqrt is not None else math.nan,
        "fun_distance": report.fun_distance if report.fun_distance is not None else math.nan,
        "unplayable_rate": 1.0 - report.playability_rate,
        "resample_rate": sum(r.resamples for r in report.records) / n,
        "eps_inner": report.eps_inner,
        "eps_outer": report.eps_outer,
        "eps_all": report.eps_all,
        "total_time": report.total_time,
        "mean_duration": report.total_time / n,
    }


@dataclass
class CellResult:
    agent: str
    music: str
    trials: int
    runs: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    def row(self) -> dict:
        out = {"agent": self.agent, "music": self.music, "trials": self.trials,
               "failures": len(self.errors)}
        for m in METRICS:
            vals = np.array([r[m] for r in self.runs], dtype=float)
            vals = vals[~np.isnan(vals)]
            out[f"{m}_mean"] = float(vals.mean()) if vals.size else math.nan
            out[f"{m}_sd"] = float(vals.std()) if vals.size else math.nan
        out["div"] = diversity(self.levels) if len(self.levels) >= 2 else math.nan
        out["error"] = self.errors[0] if self.errors else ""
        return out


def _job(args):
    config, f_star = args
    try:
        report = run_online(config, f_star)
        return run_metrics(report), report.segments, None
    except Exception as exc:  # a failed run is flagged, the batch goes on
        return None, None, f"seed {config.seed}: {type(exc).__name__}: {exc}"


def run_batch(config: RunConfig, trials: int, agents: Sequence[str],
              musics: Sequence[MusicSource], workers: int = 1) -> list[dict]:
    """One aggregated row per (agent, music) cell over seeds 1..trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cells = []
    jobs = []
    for music in musics:
        f_star = music.build()
        for agent in agents:
            cells.append(CellResult(agent, music.label, trials))
            for seed in range(1, trials + 1):
                jobs.append((config.with_(agent=agent, music=music, seed=seed), f_star))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    for k, (metrics, segments, error) in enumerate(results):
        cell = cells[k // trials]
        if error is not None:
            cell.errors.append(error)
        else:
            cell.runs.append(metrics)
            cell.levels.append(segments)
    return [c.row() for c in cells]


def batch_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def experiment_from_config(config: RunConfig, trials: int = 30, agents: Optional[Sequence[str]] = None,
                           workers: int = 1) -> list[dict]:
    musics = list(config.musics.values()) or [config.music]
    agents = list(agents) if agents else sorted(config.agents)
    return run_batch(config, trials, agents, musics, workers)
