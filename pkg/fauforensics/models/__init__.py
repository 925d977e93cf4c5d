"""Data models for FauForensics"""

from fauforensics.models.clip import (
    SAMPLE_RATE,
    AVClip,
    ClipLabel,
    Corpus,
    GenConfig,
    VideoMode,
    Waveform
)

from fauforensics.models.network import (
    ClipInputs,
    ForwardOut,
    HeadMode,
    InferenceResult,
    LossTerms,
    ModelConfig
)

from fauforensics.models.training import (
    OPTIMIZER_NOTE,
    EpochSummary,
    GradCheckReport,
    OptimState,
    StepRecord,
    TrainConfig,
    TrainResult
)

from fauforensics.models.evaluation import (
    LEVELS,
    PERTURB_LADDERS,
    CorrelationSummary,
    EvalReport,
    GroupStatistic,
    PerturbKind
)

from fauforensics.models.manifest import RunManifest

__all__ = [
    # Clips
    'SAMPLE_RATE',
    'AVClip',
    'ClipLabel',
    'Corpus',
    'GenConfig',
    'VideoMode',
    'Waveform',
    # Network
    'ClipInputs',
    'ForwardOut',
    'HeadMode',
    'InferenceResult',
    'LossTerms',
    'ModelConfig',
    # Training
    'OPTIMIZER_NOTE',
    'EpochSummary',
    'GradCheckReport',
    'OptimState',
    'StepRecord',
    'TrainConfig',
    'TrainResult',
    # Evaluation
    'LEVELS',
    'PERTURB_LADDERS',
    'CorrelationSummary',
    'EvalReport',
    'GroupStatistic',
    'PerturbKind',
    # Runs
    'RunManifest'
]
