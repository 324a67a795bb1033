"""From a WAV file to an ideal difficulty curve."""
import tempfile
from pathlib import Path

import numpy as np

from levelsync import AudioClip, analyze_music, read_wav, rms_energy, write_wav

# a 20 s tone that swells and fades: quiet intro, loud middle, quiet outro
sr = 22050
t = np.arange(sr * 20) / sr
envelope = np.interp(t, [0, 5, 10, 15, 20], [0.01, 0.05, 0.9, 0.3, 0.02])
clip = AudioClip(envelope * np.sin(2 * np.pi * 330 * t), sr)

# round trip through a real file, like a user's track would arrive
path = Path(tempfile.mkdtemp()) / "swell.wav"
write_wav(clip, path)
clip = read_wav(path)
print(f"read {path.name}: {clip.duration:.1f} s at {clip.sample_rate} Hz")

rms = rms_energy(clip)          # one value per 1024-sample hop
f_star = analyze_music(clip)    # log, clip, rescale, smooth over 100 frames
print(f"{len(rms)} RMS frames, time unit {f_star.time_unit * 1000:.1f} ms")
print(f"F* ranges over [{f_star.values.min():.3f}, {f_star.values.max():.3f}]")

# coarse text plot, one row per second
per_second = int(round(1 / f_star.time_unit))
for sec in range(0, len(f_star) // per_second):
    v = f_star.values[sec * per_second]
    print(f"{sec:3d}s {v:5.3f} " + "#" * int(v * 50))

# full-scale constant and silence pin the two ends of the scale
print("silence ->", analyze_music(AudioClip(np.zeros(sr), sr)).values.max())
print("full scale ->", analyze_music(AudioClip(np.ones(sr), sr)).values.min())
