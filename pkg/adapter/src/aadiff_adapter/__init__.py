"""Bridge between aadiff's file formats and foundation-model backends."""

from .encoders import ClapAudioEncoder, ClipTextEncoder, OfflineAudioEncoder, OfflineTextEncoder
from .errors import AdapterError, InjectionError, ModelLoadError, ScheduleFormatError
from .export import ExportManifest, export_embeddings, write_identity_schedule
from .inject import (
    ClipScorer,
    TinyDenoiser,
    TokenColumnScaler,
    default_token_embeddings,
    inject_schedule,
    load_schedule,
    write_png,
)

__version__ = "0.1.0"
