"""cfnloop: iterative generation and validation of deployable CloudFormation templates."""

from .graph import DependencyGraph, dependency_graph
from .stages import Stage, StageReport
from .template import (
    Intrinsic,
    Template,
    TemplateMetrics,
    classify_difficulty,
    extract_code_block,
    load_template_file,
    measure,
    parse_template,
    serialize_template,
)

__version__ = "0.1.0"

__all__ = [
    "DependencyGraph",
    "Intrinsic",
    "Stage",
    "StageReport",
    "Template",
    "TemplateMetrics",
    "classify_difficulty",
    "dependency_graph",
    "extract_code_block",
    "load_template_file",
    "measure",
    "parse_template",
    "serialize_template",
]
