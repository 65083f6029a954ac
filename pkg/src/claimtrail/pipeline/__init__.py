from claimtrail.pipeline.queue import CaptureEvent, CaptureQueue
from claimtrail.pipeline.worker import (
    FaultInjector,
    Outcome,
    PipelineWorker,
    ProcessingResult,
    QueueStats,
)

__all__ = [
    "CaptureEvent",
    "CaptureQueue",
    "FaultInjector",
    "Outcome",
    "PipelineWorker",
    "ProcessingResult",
    "QueueStats",
]
