"""Command line entry point: ``levelsync <command> ...``.

Exit codes: 0 success, 1 configuration or input error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

from .audio import analyze_music, read_wav
from .config import RunConfig, load_config
from .errors import AudioError, ConfigError, LevelFormatError, NoStandableStart
from .experiment import batch_csv, experiment_from_config, run_metrics
from .level import difficulty, parse_level
from .metrics import diversity, summarize
from .online import export_report, load_report, run_online
from .playability import PhysicsParams, check_first, check_playable

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def cmd_analyze_music(args) -> int:
    f_star = analyze_music(read_wav(args.wav), window=args.window)
    if args.out:
        f_star.save_csv(args.out)
        print(f"wrote {len(f_star)} values ({f_star.duration:.2f} s) to {args.out}")
    else:
        sys.stdout.write(f_star.to_csv())
    return EXIT_OK


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "agent", None):
        if args.agent not in cfg.agents:
            raise ConfigError(f"unknown agent {args.agent!r}; known: {sorted(cfg.agents)}")
        changes["agent"] = args.agent
    if getattr(args, "segments", None) is not None:
        changes["segments"] = args.segments
    cfg = cfg.with_(**changes) if changes else cfg
    if getattr(args, "oracle", False):
        cfg = cfg.oracle()
    return cfg


def cmd_generate(args) -> int:
    cfg = _config(args)
    report = run_online(cfg)
    out = args.out or cfg.output or "run"
    export_report(report, out)
    print(f"{len(report.records)} segments, {report.total_time:.2f} s of play -> {out}")
    print(f"eps_inner={report.eps_inner:.4f} eps_outer={report.eps_outer:.4f} eps_all={report.eps_all:.4f}")
    return EXIT_OK


def cmd_check(args) -> int:
    segments = parse_level(Path(args.level).read_text())
    physics = load_config(args.config).physics if args.config else PhysicsParams()
    all_ok = True
    for i, seg in enumerate(segments):
        try:
            trace = check_first(seg, physics) if i == 0 else check_playable(segments[i - 1], seg, physics)
            verdict = "playable" if trace is not None else "UNPLAYABLE"
        except NoStandableStart:
            verdict = "NO-START"
        all_ok &= verdict == "playable"
        pair = "spawn" if i == 0 else f"{i}"
        print(f"segment {i + 1:3d} (after {pair:>5}): {verdict:10s} difficulty={difficulty(seg):.4f}")
    return EXIT_OK if all_ok or not args.strict else EXIT_RUNTIME


def _fmt(v) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.4f}"


def cmd_evaluate(args) -> int:
    reports = [summarize(load_report(p)) for p in args.runs]
    levels = [r.segments for r in reports if r.segments]
    div = diversity(levels) if len(levels) >= 2 else math.nan
    cols = ["run", "sqrt_neg_F", "neg_P", "eps_inner", "eps_outer", "eps_all", "Div"]
    rows = []
    for path, rep in zip(args.runs, reports):
        m = run_metrics(rep)
        rows.append([str(path), m["fun_sqrt"], m["unplayable_rate"], m["eps_inner"],
                     m["eps_outer"], m["eps_all"], div])
    if args.csv:
        print(",".join(cols))
        for row in rows:
            print(",".join([row[0]] + [repr(float(v)) if v is not None else "nan" for v in row[1:]]))
    else:
        print(" ".join(f"{c:>12}" for c in cols))
        for row in rows:
            print(f"{row[0]:>12} " + " ".join(f"{_fmt(v):>12}" for v in row[1:]))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _config(args)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.read(args.config)
    section = cp["experiment"] if cp.has_section("experiment") else {}
    try:
        trials = args.trials or int(section.get("trials", 30))
        workers = args.workers or int(section.get("workers", 1))
    except ValueError as exc:
        raise ConfigError(f"[experiment] {exc}") from None
    agents = [a.strip() for a in section.get("agents", "").split(",") if a.strip()] or None
    if agents:
        unknown = set(agents) - set(cfg.agents)
        if unknown:
            raise ConfigError(f"[experiment] unknown agents {sorted(unknown)}")
    rows = experiment_from_config(cfg, trials, agents, workers)
    text = batch_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levelsync", description="Music-driven online level generation")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze-music", help="WAV -> ideal difficulty CSV")
    a.add_argument("wav")
    a.add_argument("--out")
    a.add_argument("--window", type=int, default=100)
    a.set_defaults(func=cmd_analyze_music)

    g = sub.add_parser("generate", help="simulate one online run")
    g.add_argument("--config")
    g.add_argument("--seed", type=int)
    g.add_argument("--agent")
    g.add_argument("--segments", type=int)
    g.add_argument("--oracle", action="store_true", help="noise-free generator")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="playability and difficulty of a level file")
    c.add_argument("level")
    c.add_argument("--config", help="read [physics] from a run config")
    c.add_argument("--strict", action="store_true", help="exit 2 if any pair is unplayable")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("evaluate", help="metrics table for exported runs")
    e.add_argument("runs", nargs="+", help="run.json files or run directories")
    e.add_argument("--csv", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("experiment", help="agents x musics x seeds batch")
    x.add_argument("--config", required=True)
    x.add_argument("--trials", type=int)
    x.add_argument("--workers", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--out")
    x.set_defaults(func=cmd_experiment, oracle=False)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, LevelFormatError, AudioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
