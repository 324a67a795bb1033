"""WAV ingestion, RMS energy and the energy-to-difficulty mapping."""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyClip, NotWav, TruncatedData, UnsupportedEncoding

DEFAULT_FRAME_LENGTH = 2048
DEFAULT_HOP_LENGTH = 1024
DEFAULT_TIME_UNIT = 0.02322
DEFAULT_SMOOTHING_WINDOW = 100

LOG_FLOOR = -2.5

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if len(self.samples) == 0:
            raise EmptyClip("audio clip has no samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True, eq=False)
class IdealFeatureSequence:
    """Per-time-unit target feature values derived from music."""

    values: np.ndarray
    time_unit: float = DEFAULT_TIME_UNIT

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("ideal feature sequence must be a non-empty 1-D sequence")
        if self.time_unit <= 0:
            raise ValueError("time_unit must be positive")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, IdealFeatureSequence):
            return NotImplemented
        return self.time_unit == other.time_unit and np.array_equal(self.values, other.values)

    @property
    def duration(self) -> float:
        return len(self.values) * self.time_unit

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_index", "time_s", "f_star"])
        for t, v in enumerate(self.values):
            w.writerow([t, repr(round(t * self.time_unit, 9)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, time_unit: float | None = None) -> "IdealFeatureSequence":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("feature CSV has no rows")
        rows.sort(key=lambda r: int(r["t_index"]))
        values = np.array([float(r["f_star"]) for r in rows])
        if time_unit is None:
            if len(rows) > 1 and rows[1].get("time_s") not in (None, ""):
                time_unit = float(rows[1]["time_s"]) - float(rows[0]["time_s"])
            else:
                time_unit = DEFAULT_TIME_UNIT
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("f_star values must lie in [0, 1]")
        return cls(values, time_unit)

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def load_csv(cls, path) -> "IdealFeatureSequence":
        return cls.from_csv(Path(path).read_text())


def _chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        yield cid, body, len(body) < size
        pos += 8 + size + (size & 1)


def parse_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono clip in [-1, 1]."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWav("missing RIFF/WAVE header")
    fmt = None
    pcm = None
    for cid, body, short in _chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise TruncatedData("fmt chunk too short")
            code, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", body)
            if code == WAVE_FORMAT_EXTENSIBLE and len(body) >= 26:
                code = struct.unpack_from("<H", body, 24)[0]
            fmt = (code, channels, rate, block_align, bits)
        elif cid == b"data":
            if short:
                raise TruncatedData("data chunk shorter than its declared size")
            pcm = body
    if fmt is None:
        raise NotWav("no fmt chunk")
    if pcm is None:
        raise TruncatedData("no data chunk")
    code, channels, rate, block_align, bits = fmt
    if code == WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = "<i2", 32768.0
    elif code == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = "<f4", 1.0
    else:
        raise UnsupportedEncoding(code, bits)
    if channels not in (1, 2):
        raise UnsupportedEncoding(code, bits)
    frame_bytes = channels * bits // 8
    if len(pcm) % frame_bytes:
        raise TruncatedData("data chunk ends mid-frame")
    samples = np.frombuffer(pcm, dtype=dtype).astype(np.float64) / scale
    samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioClip(np.clip(samples, -1.0, 1.0), rate)


def read_wav(path) -> AudioClip:
    return parse_wav(Path(path).read_bytes())


def write_wav(clip: AudioClip, path=None, float32: bool = False) -> bytes:
    """Encode a mono clip; returns the bytes and writes them if a path is given."""
    x = np.clip(np.asarray(clip.samples, dtype=np.float64), -1.0, 1.0)
    if float32:
        code, bits, payload = WAVE_FORMAT_IEEE_FLOAT, 32, x.astype("<f4").tobytes()
    else:
        ints = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        code, bits, payload = WAVE_FORMAT_PCM, 16, ints.tobytes()
    block = bits // 8
    fmt = struct.pack("<HHIIHH", code, 1, clip.sample_rate, clip.sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    out = b"RIFF" + struct.pack("<I", len(body)) + body
    if path is not None:
        Path(path).write_bytes(out)
    return out


def rms_energy(clip: AudioClip, frame_length: int = DEFAULT_FRAME_LENGTH,
               hop_length: int = DEFAULT_HOP_LENGTH) -> np.ndarray:
    """Frame-wise RMS with frames centred on ``j * hop_length``.

    The signal is reflection-padded by half a frame on each side; the number
    of frames is ``ceil(len / hop_length)``.
    """
    if not frame_length >= hop_length >= 1:
        raise ValueError("need frame_length >= hop_length >= 1")
    x = np.asarray(clip.samples, dtype=np.float64)
    if x.size == 0:
        raise EmptyClip("cannot compute RMS of an empty clip")
    half = frame_length // 2
    mode = "reflect" if x.size > 1 else "edge"
    padded = np.pad(x, (half, frame_length - half), mode=mode)
    n_frames = math.ceil(x.size / hop_length)
    # cumulative sum of squares gives every frame's energy in O(n)
    csum = np.concatenate(([0.0], np.cumsum(padded * padded)))
    starts = np.arange(n_frames) * hop_length
    energy = (csum[starts + frame_length] - csum[starts]) / frame_length
    return np.sqrt(np.maximum(energy, 0.0))


def smooth(values: np.ndarray, window: int) -> np.ndarray:
    """Centred moving mean with stride 1; the window shrinks at the edges."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    first = np.arange(n) - window // 2
    lo = np.clip(first, 0, n)
    hi = np.clip(first + window, 0, n)
    csum = np.concatenate(([0.0], np.cumsum(v)))
    return (csum[hi] - csum[lo]) / (hi - lo)


def energy_to_difficulty(rms) -> np.ndarray:
    """log10, clip to [-2.5, 0] and map linearly onto [0, 1]."""
    x = np.asarray(rms, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logged = np.log10(np.maximum(x, 0.0))
    return (np.clip(logged, LOG_FLOOR, 0.0) - LOG_FLOOR) / -LOG_FLOOR


def to_ideal_sequence(rms, window: int = DEFAULT_SMOOTHING_WINDOW,
                      time_unit: float = DEFAULT_TIME_UNIT) -> IdealFeatureSequence:
    if window < 1:
        raise ValueError("window must be >= 1")
    mapped = energy_to_difficulty(rms)
    values = np.clip(smooth(mapped, window), 0.0, 1.0)
    return IdealFeatureSequence(values, time_unit)


def analyze_music(clip: AudioClip, frame_length: int = DEFAULT_FRAME_LENGTH,
                  hop_length: int = DEFAULT_HOP_LENGTH,
                  window: int = DEFAULT_SMOOTHING_WINDOW) -> IdealFeatureSequence:
    """Full pipeline from a clip to its ideal difficulty sequence."""
    rms = rms_energy(clip, frame_length, hop_length)
    return to_ideal_sequence(rms, window, time_unit=hop_length / clip.sample_rate)
