"""Player-adaptive platformer level generation driven by music energy."""

from .agents import DEFAULT_AGENTS, AgentProfile, Player, PlayResult, play
from .audio import (AudioClip, IdealFeatureSequence, analyze_music, parse_wav, read_wav, rms_energy,
                    to_ideal_sequence, write_wav)
from .config import ControllerConfig, MusicSource, RunConfig, load_config
from .controller import (
    ConstantController,
    ControlState,
    ControllerArchive,
    LsKnnController,
    LsKnnParams,
    estimate_duration,
    evaluate_candidate,
    next_target,
    observe,
)
from .generator import GeneratorContext, GeneratorParams, generate, generate_playable, repair
from .level import (
    FeatureBounds,
    Segment,
    TileKind,
    difficulty,
    flat_segment,
    parse_level,
    serialize_level,
    tile_difference_ratio,
    tile_pattern_divergence,
    validate,
)
from .metrics import (
    RunReport,
    SegmentRecord,
    controllability,
    diversity,
    fun_range_score,
    inner_error,
    outer_error,
    overall_error,
    synthetic_target_walk,
)
from .online import export_report, load_report, run_online
from .experiment import run_batch
from .playability import Action, PhysicsParams, Trace, check_first, check_playable

__version__ = "0.1.0"
