"""Streaming classification toolkit: KS-window drift detection, incremental
soft prototype learning with adaptive gradient updates, drift-reactive
prototype replacement, synthetic drift streams and a prequential benchmark
harness."""

from .core import (
    CsvStream,
    DimensionMismatchError,
    LabeledSample,
    SeededRng,
    StreamMeta,
    StreamSource,
    stream_take,
    stream_take_with_truth,
)
from .kswin import (
    DriftSignal,
    KswinConfig,
    KswinDetector,
    SlidingWindow,
    WindowNotFullError,
    detect,
    ecdf_eval,
    ks_statistic,
    ks_threshold,
    split_windows,
)
from .rslvq import Prototype, RslvqConfig, RslvqModel, init_model, rmsprop_step
from .reactive import AdaptationReport, RrslvqModel
from .generators import (
    ConceptStream,
    DriftSchedule,
    HyperplaneGenerator,
    MixedGenerator,
    RbfGenerator,
    RtgGenerator,
    SeaGenerator,
    compose_drift,
    make_stream,
    mixed_label,
)
from .evaluation import (
    DetectorEvalRecord,
    NaiveBayesModel,
    PrequentialRecord,
    RiskCheckRecord,
    detector_carrier_run,
    detector_confusion,
    footprint,
    kappa,
    prequential_run,
    risk_check,
)

__version__ = "0.1.0"
