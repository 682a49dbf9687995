from .manifest import Task, load_manifest
from .metrics import ErrorCategory, Report, build_report, classify_error, pass_itr

__all__ = ["ErrorCategory", "Report", "Task", "build_report", "classify_error", "load_manifest", "pass_itr"]
