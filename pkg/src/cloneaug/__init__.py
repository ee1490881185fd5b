"""cloneaug: voice-clone data augmentation toolkit for speech-to-text training."""

__version__ = "0.1.0"

from .backends import (
    BackendSpec,
    GenerationResult,
    MockClonerKnobs,
    MockTrainerKnobs,
    MockTranscriberKnobs,
    TrainRunConfig,
)
from .corpus import (
    AudioClip,
    ConditioningConfig,
    CorpusEntry,
    SubsetSpec,
    TranscriptRecord,
    drop_empty_transcripts,
    ingest_corpus,
    split_subsets,
)
from .evalwer import CorpusWerReport, WerBreakdown, evaluate_corpus, wer
from .genplan import GenerationJob, GenPlanConfig, plan_generation
from .manifest import ManifestRow, build_eval_csv, build_train_dev
from .pipeline import ExperimentConfig, run_experiment
from .qualfilter import FilterConfig, FilterDecision, filter_generated
from .rating import (
    CombinationScore,
    RatingCategory,
    RatingRecord,
    RatingStore,
    RatingTask,
    compute_scores,
    create_session,
)
from .textnorm import NormalizationReport, normalize_transcript

__all__ = [
    "AudioClip",
    "BackendSpec",
    "CombinationScore",
    "ConditioningConfig",
    "CorpusEntry",
    "CorpusWerReport",
    "ExperimentConfig",
    "FilterConfig",
    "FilterDecision",
    "GenPlanConfig",
    "GenerationJob",
    "GenerationResult",
    "ManifestRow",
    "MockClonerKnobs",
    "MockTrainerKnobs",
    "MockTranscriberKnobs",
    "NormalizationReport",
    "RatingCategory",
    "RatingRecord",
    "RatingStore",
    "RatingTask",
    "SubsetSpec",
    "TrainRunConfig",
    "TranscriptRecord",
    "WerBreakdown",
    "build_eval_csv",
    "build_train_dev",
    "compute_scores",
    "create_session",
    "drop_empty_transcripts",
    "evaluate_corpus",
    "filter_generated",
    "ingest_corpus",
    "normalize_transcript",
    "plan_generation",
    "run_experiment",
    "split_subsets",
    "wer",
]
