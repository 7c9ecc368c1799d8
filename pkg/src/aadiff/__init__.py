"""Audio-synchronized attention edit schedules for diffusion-based video editing.

Pipeline: decode audio -> per-frame envelope -> sliding-window smoothing
-> gain mapping -> token matching against embeddings -> per-frame edit
schedule -> attention reweighting, verified end to end by a
deterministic mock synthesizer.
"""

from .attention import AttentionMap, ReweightSpec, apply_schedule_step, region_mass, reweight
from .audio import AudioClip, FrameGrid, decode_wav, encode_wav, frame_samples, make_frame_grid
from .envelope import (
    Envelope,
    GainConfig,
    SmoothingConfig,
    compute_envelope,
    mix_envelopes,
    smooth,
    to_multipliers,
    total_variation,
)
from .errors import (
    AadiffError,
    ConfigError,
    DecodeError,
    DegenerateEmbedding,
    DegenerateSeries,
    DimensionError,
    EmptyAudio,
    EmptySchedule,
    FormatError,
    GridMismatch,
    InvalidFps,
    InvalidWindow,
    UnsupportedFormat,
    ValidationError,
    WriteError,
)
from .matching import (
    AudioEmbedding,
    EmbeddingSet,
    MatchResult,
    cosine_similarity,
    load_audio_embedding,
    load_embeddings,
    top_k_tokens,
)
from .mocksynth import (
    EffectSpec,
    MetricSeries,
    MockImage,
    emit_plot_data,
    make_gaussian_attention,
    pearson,
    proxy_score,
    read_ppm,
    render_frame,
    render_video,
    solid_image,
    write_ppm,
)
from .schedule import EditSchedule, EditSource, build_schedule, parse, serialize

__version__ = "0.1.0"
