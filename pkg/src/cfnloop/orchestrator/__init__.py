from .feedback import FeedbackMessage, FeedbackTier, StageBudget, make_feedback, next_tier
from .runner import IterationRecord, RunOptions, RunRecord, TaskInput, run_task
from .sessions import SessionStore

__all__ = [
    "FeedbackMessage",
    "FeedbackTier",
    "IterationRecord",
    "RunOptions",
    "RunRecord",
    "SessionStore",
    "StageBudget",
    "TaskInput",
    "make_feedback",
    "next_tier",
    "run_task",
]
