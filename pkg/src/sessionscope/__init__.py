"""Gameplay telemetry recording, replay, and analytics."""

from .analytics import (
    CoverageGrid,
    Frustum,
    MetricKind,
    MetricsRecorder,
    UsageMetrics,
    build_frustum,
    compute_coverage,
    coverage_report,
    frustum_contains,
    visibility_intervals,
)
from .annotations import Annotation, AnnotationStore
from .errors import (
    CapacityError,
    EmptyDataError,
    InvalidOrientationError,
    LogParseError,
    LogStructureError,
    RegistrationError,
    SessionScopeError,
    StateError,
    UnknownIdError,
    ValidationFailedError,
)
from .geometry import canonicalize_quaternion, lerp_position, slerp_orientation
from .heatmap import (
    DensityGrid,
    GridSpec,
    accumulate_density,
    colorize,
    export_heatmap,
    load_sidecar,
)
from .logstore import (
    LOG_EXTENSION,
    DiscoveredLog,
    Violation,
    discover_logs,
    parse_session,
    parse_session_file,
    session_to_bytes,
    validate_session,
    write_session,
    write_session_file,
)
from .model import (
    AudioEvent,
    CameraParams,
    Category,
    HandFrame,
    HandSide,
    InputEvent,
    InputKind,
    ObjectDescriptor,
    Pose,
    PoseSample,
    SessionLog,
    StaticObject,
)
from .recorder import Recording, RecordingConfig, sampler_instant, start_recording
from .replay import (
    DEFAULT_LOAD_LIMIT,
    EVENT_WINDOW,
    PALETTE,
    FilterSet,
    LoadedSet,
    ReplayEngine,
    ReplayFrame,
    TransportState,
    load_sessions,
)
from .synth import SCENARIOS, ScenarioSpec, synthesize_session

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
