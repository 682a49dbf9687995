from .engine import DeploymentFailure, delete_stack, deploy
from .environment import EnvConfig, SimEnvironment, StackState, StackStatus, new_environment
from .intrinsics import ResolutionContext, evaluate_condition, evaluate_intrinsic, resolve_tree

__all__ = [
    "DeploymentFailure",
    "EnvConfig",
    "ResolutionContext",
    "SimEnvironment",
    "StackState",
    "StackStatus",
    "delete_stack",
    "deploy",
    "evaluate_condition",
    "evaluate_intrinsic",
    "new_environment",
    "resolve_tree",
]
