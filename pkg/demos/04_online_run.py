"""A complete simulated session: music -> controller -> generator -> player."""
import tempfile

from levelsync import MusicSource, RunConfig, export_report, load_report, run_online

music = MusicSource("sine", value=0.5, amplitude=0.3, period=45, length=90)
config = RunConfig(music=music, agent="steady", seed=3, segments=None, stop_at_music_end=True)
report = run_online(config)

print(f"{len(report.records)} segments, {report.total_time:.1f} s of play")
print(f"eps_inner {report.eps_inner:.4f}  eps_outer {report.eps_outer:.4f}  eps_all {report.eps_all:.4f}")
print(f"playable {report.playability_rate:.0%}  fun distance {report.fun_distance:.4f}")

# target (o) against the music's curve (.) at each segment start
fs = report.f_star
for r in report.records[::2]:
    ideal = fs.values[min(int(round(r.start / fs.time_unit)), len(fs) - 1)]
    row = [" "] * 51
    row[int(ideal * 50)] = "."
    row[int(r.target * 50)] = "o"
    print(f"{r.start:6.1f}s |{''.join(row)}|")

out = export_report(report, tempfile.mkdtemp())
print("artifacts:", sorted(p.name for p in out.iterdir()))
again = load_report(out)
print("reloaded equal:", again == report)
