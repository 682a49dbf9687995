"""CloudFormation template model: parsing, measurement, difficulty scoring.

Templates arrive as YAML (with short-form intrinsic tags) or JSON. Both
short and long intrinsic forms normalize to the same Intrinsic nodes so
downstream stages see a single representation. Unknown intrinsics and
unknown top-level sections are preserved for the syntax stage to flag;
the parser only rejects text it cannot read at all.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import DuplicateKeyError, EmptyExtraction, ParseError

# Top-level sections CloudFormation accepts.
ALLOWED_SECTIONS = (
    "AWSTemplateFormatVersion",
    "Description",
    "Metadata",
    "Parameters",
    "Rules",
    "Mappings",
    "Conditions",
    "Transform",
    "Resources",
    "Outputs",
)

# Pseudo parameters resolvable by Ref.
PSEUDO_PARAMETERS = (
    "AWS::Region",
    "AWS::AccountId",
    "AWS::StackName",
    "AWS::NoValue",
    "AWS::Partition",
    "AWS::URLSuffix",
)

# Intrinsics the toolchain understands end to end. Anything else parses
# into an Intrinsic node but is flagged by the syntax stage.
SUPPORTED_INTRINSICS = frozenset(
    {
        "Ref",
        "Fn::GetAtt",
        "Fn::Sub",
        "Fn::Join",
        "Fn::Select",
        "Fn::Split",
        "Fn::GetAZs",
        "Fn::FindInMap",
        "Fn::If",
        "Fn::ImportValue",
        "Fn::Equals",
        "Fn::And",
        "Fn::Or",
        "Fn::Not",
        "Fn::Base64",
        "Condition",
    }
)

_RESOURCE_TYPE_RE = re.compile(r"^[A-Za-z0-9]+::[A-Za-z0-9]+::[A-Za-z0-9]+$")
_INTRINSIC_KEY_RE = re.compile(r"^(Ref|Fn::[A-Za-z0-9:]+)$")
_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


@dataclass(eq=True)
class Intrinsic:
    """Normalized intrinsic function node: !Ref X and {"Ref": "X"} both land here."""

    name: str
    argument: Any

    def __repr__(self) -> str:  # keeps failed assertions readable
        return f"Intrinsic({self.name!r}, {self.argument!r})"


@dataclass
class ParameterDef:
    param_type: str = ""
    default: Any = None
    allowed_values: list | None = None
    no_echo: bool = False
    description: str | None = None
    extra: dict = field(default_factory=dict)

    def has_default(self) -> bool:
        return self.default is not None


@dataclass
class ResourceDef:
    resource_type: str = ""
    properties: dict = field(default_factory=dict)
    depends_on: list[str] = field(default_factory=list)
    condition: str | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class Template:
    description: str | None
    parameters: dict[str, ParameterDef]
    resources: dict[str, ResourceDef]
    outputs: dict[str, Any]
    mappings: dict[str, Any]
    conditions: dict[str, Any]
    source_text: str
    source_format: str
    format_version: str | None = None
    metadata: Any = None
    rules: Any = None
    transform: Any = None
    unknown_sections: dict[str, Any] = field(default_factory=dict)

    def structurally_equal(self, other: "Template") -> bool:
        """Equality over content, ignoring source text and format."""
        mine = _strip_source(self)
        theirs = _strip_source(other)
        return mine == theirs


def _strip_source(t: Template) -> tuple:
    return (
        t.description,
        t.parameters,
        t.resources,
        t.outputs,
        t.mappings,
        t.conditions,
        t.format_version,
        t.metadata,
        t.rules,
        t.transform,
        t.unknown_sections,
    )


@dataclass
class TemplateMetrics:
    loc: int
    resource_count: int
    parameter_count: int
    token_estimate: int
    parse_ok: bool = True


def has_conventional_type(resource_type: str) -> bool:
    """True when the type follows the Provider::Service::ResourceType form."""
    return bool(_RESOURCE_TYPE_RE.match(resource_type or ""))


# --- YAML loading ---------------------------------------------------------


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate keys and builds Intrinsic nodes."""

    def construct_mapping(self, node, deep=False):
        self.flatten_mapping(node)
        mapping = {}
        for key_node, value_node in node.value:
            key = self.construct_object(key_node, deep=deep)
            try:
                duplicate = key in mapping
            except TypeError as exc:  # unhashable key
                mark = key_node.start_mark
                raise ParseError(
                    f"unhashable mapping key: {exc}", line=mark.line + 1, column=mark.column + 1
                ) from exc
            if duplicate:
                mark = key_node.start_mark
                raise DuplicateKeyError(str(key), line=mark.line + 1, column=mark.column + 1)
            mapping[key] = self.construct_object(value_node, deep=deep)
        return mapping


def _canonical_intrinsic_name(tag_suffix: str) -> str:
    if tag_suffix == "Ref":
        return "Ref"
    if tag_suffix == "Condition":
        return "Condition"
    return f"Fn::{tag_suffix}"


def _split_getatt(arg: Any) -> Any:
    if isinstance(arg, str):
        logical, _, attr = arg.partition(".")
        return [logical, attr] if attr else [logical]
    return arg


def _intrinsic_from_tag(loader: _StrictLoader, tag_suffix: str, node: yaml.Node) -> Intrinsic:
    name = _canonical_intrinsic_name(tag_suffix)
    if isinstance(node, yaml.ScalarNode):
        arg: Any = loader.construct_scalar(node)
    elif isinstance(node, yaml.SequenceNode):
        arg = loader.construct_sequence(node, deep=True)
    else:
        arg = loader.construct_mapping(node, deep=True)
    if name == "Fn::GetAtt":
        arg = _split_getatt(arg)
    return Intrinsic(name, arg)


_StrictLoader.add_multi_constructor("!", _intrinsic_from_tag)


def load_strict_yaml(text: str) -> Any:
    """Parse YAML with duplicate-key rejection and intrinsic tags.

    Raises ParseError (with 1-based line/column when available) or
    DuplicateKeyError.
    """
    try:
        return yaml.load(text, Loader=_StrictLoader)
    except (ParseError, DuplicateKeyError):
        raise
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        column = mark.column + 1 if mark else None
        raise ParseError(exc.problem or str(exc), line=line, column=column) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from exc


def _json_pairs_hook(pairs):
    obj: dict = {}
    for key, value in pairs:
        if key in obj:
            raise DuplicateKeyError(str(key))
        obj[key] = value
    return obj


def load_strict_json(text: str) -> Any:
    try:
        return json.loads(text, object_pairs_hook=_json_pairs_hook)
    except DuplicateKeyError:
        raise
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc


# --- Normalization --------------------------------------------------------


def _normalize(value: Any, in_condition: bool = False) -> Any:
    """Fold long-form intrinsic mappings into Intrinsic nodes."""
    if isinstance(value, Intrinsic):
        arg = _normalize(value.argument, in_condition)
        if value.name == "Fn::GetAtt":
            arg = _split_getatt(arg)
        return Intrinsic(value.name, arg)
    if isinstance(value, dict):
        if len(value) == 1:
            key = next(iter(value))
            if isinstance(key, str) and _INTRINSIC_KEY_RE.match(key):
                arg = _normalize(value[key], in_condition)
                if key == "Fn::GetAtt":
                    arg = _split_getatt(arg)
                return Intrinsic(key, arg)
            # {"Condition": "Name"} is a condition reference only inside
            # the Conditions section; elsewhere (IAM statements) it is data.
            if in_condition and key == "Condition" and isinstance(value[key], str):
                return Intrinsic("Condition", value[key])
        return {k: _normalize(v, in_condition) for k, v in value.items()}
    if isinstance(value, list):
        return [_normalize(v, in_condition) for v in value]
    return value


def _as_list(value: Any) -> list:
    if value is None:
        return []
    if isinstance(value, list):
        return list(value)
    return [value]


def _build_parameter(raw: Any) -> ParameterDef:
    if not isinstance(raw, dict):
        return ParameterDef(extra={"_raw": raw})
    known = {"Type", "Default", "AllowedValues", "NoEcho", "Description"}
    return ParameterDef(
        param_type=str(raw.get("Type", "")),
        default=raw.get("Default"),
        allowed_values=raw.get("AllowedValues"),
        no_echo=bool(raw.get("NoEcho", False)),
        description=raw.get("Description"),
        extra={k: v for k, v in raw.items() if k not in known},
    )


def _build_resource(raw: Any) -> ResourceDef:
    if not isinstance(raw, dict):
        return ResourceDef(extra={"_raw": raw})
    known = {"Type", "Properties", "DependsOn", "Condition"}
    depends = _as_list(raw.get("DependsOn"))
    return ResourceDef(
        resource_type=str(raw.get("Type", "")),
        properties=raw.get("Properties") or {},
        depends_on=[str(d) for d in depends],
        condition=raw.get("Condition"),
        extra={k: v for k, v in raw.items() if k not in known},
    )


def parse_template(text: str, format_hint: str | None = None) -> Template:
    """Parse template text into a Template.

    format_hint is "yaml" or "json"; when absent the format is sniffed
    from the first non-space character.
    """
    if not text or not text.strip():
        raise ParseError("empty template text")

    fmt = format_hint
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "yaml"
    if fmt not in ("yaml", "json"):
        raise ParseError(f"unknown format hint {fmt!r}")

    doc = load_strict_json(text) if fmt == "json" else load_strict_yaml(text)
    if not isinstance(doc, dict):
        raise ParseError("template root is not a mapping", line=1, column=1)

    for section in ("Parameters", "Resources", "Outputs", "Mappings", "Conditions"):
        value = doc.get(section)
        if value is not None and not isinstance(value, dict):
            raise ParseError(f"section {section} must be a mapping")

    doc = {k: _normalize(v, in_condition=(k == "Conditions")) for k, v in doc.items()}

    parameters = {
        str(name): _build_parameter(raw) for name, raw in (doc.get("Parameters") or {}).items()
    }
    resources = {
        str(name): _build_resource(raw) for name, raw in (doc.get("Resources") or {}).items()
    }
    unknown = {k: v for k, v in doc.items() if k not in ALLOWED_SECTIONS}

    return Template(
        description=doc.get("Description"),
        parameters=parameters,
        resources=resources,
        outputs=doc.get("Outputs") or {},
        mappings=doc.get("Mappings") or {},
        conditions=doc.get("Conditions") or {},
        source_text=text,
        source_format=fmt,
        format_version=doc.get("AWSTemplateFormatVersion"),
        metadata=doc.get("Metadata"),
        rules=doc.get("Rules"),
        transform=doc.get("Transform"),
        unknown_sections=unknown,
    )


def load_template_file(path, format_hint: str | None = None) -> Template:
    """Parse a template file, sniffing the format from its extension.

    .json maps to JSON, .yaml/.yml (and anything else) to YAML; an
    explicit format_hint overrides the extension.
    """
    from pathlib import Path

    path = Path(path)
    if format_hint is None:
        format_hint = "json" if path.suffix.lower() == ".json" else "yaml"
    return parse_template(path.read_text(), format_hint)


# --- Serialization (long-form intrinsics) ---------------------------------


def _denormalize(value: Any) -> Any:
    if isinstance(value, Intrinsic):
        return {value.name: _denormalize(value.argument)}
    if isinstance(value, dict):
        return {k: _denormalize(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_denormalize(v) for v in value]
    return value


def template_to_mapping(template: Template) -> dict:
    """Rebuild the plain-dict document with long-form intrinsics."""
    doc: dict[str, Any] = {}
    if template.format_version is not None:
        doc["AWSTemplateFormatVersion"] = template.format_version
    if template.description is not None:
        doc["Description"] = template.description
    if template.metadata is not None:
        doc["Metadata"] = _denormalize(template.metadata)
    if template.parameters:
        params: dict[str, Any] = {}
        for name, p in template.parameters.items():
            raw: dict[str, Any] = {}
            if p.param_type:
                raw["Type"] = p.param_type
            if p.default is not None:
                raw["Default"] = _denormalize(p.default)
            if p.allowed_values is not None:
                raw["AllowedValues"] = _denormalize(p.allowed_values)
            if p.no_echo:
                raw["NoEcho"] = True
            if p.description is not None:
                raw["Description"] = p.description
            raw.update(_denormalize(p.extra))
            params[name] = raw
        doc["Parameters"] = params
    if template.rules is not None:
        doc["Rules"] = _denormalize(template.rules)
    if template.mappings:
        doc["Mappings"] = _denormalize(template.mappings)
    if template.conditions:
        doc["Conditions"] = _denormalize(template.conditions)
    if template.transform is not None:
        doc["Transform"] = _denormalize(template.transform)
    resources: dict[str, Any] = {}
    for name, r in template.resources.items():
        raw = {}
        if r.resource_type:
            raw["Type"] = r.resource_type
        if r.condition is not None:
            raw["Condition"] = r.condition
        if r.depends_on:
            raw["DependsOn"] = list(r.depends_on)
        if r.properties:
            raw["Properties"] = _denormalize(r.properties)
        raw.update(_denormalize(r.extra))
        resources[name] = raw
    doc["Resources"] = resources
    if template.outputs:
        doc["Outputs"] = _denormalize(template.outputs)
    doc.update(_denormalize(template.unknown_sections))
    return doc


def serialize_template(template: Template, fmt: str | None = None) -> str:
    fmt = fmt or template.source_format
    doc = template_to_mapping(template)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


# --- Measurement and difficulty -------------------------------------------

# Upper bounds per difficulty level, from the benchmark's banding table.
# A metric falls in the smallest level whose bound it is below.
_LOC_BOUNDS = (50, 100, 150, 200)
_RESOURCE_BOUNDS = (2, 4, 6, 12)
_PARAMETER_BOUNDS = (2, 5, 9, 14)


def measure(text: str) -> TemplateMetrics:
    """Size metrics for raw template text.

    loc counts lines with at least one non-whitespace character. The token
    estimate is ceil(chars / 4), a deliberately simple stand-in used only
    for size filtering; on realistic templates it tracks a code-aware
    segmentation count to within about +/-25%. Resource/parameter counts
    need a parseable template and fall back to 0 with parse_ok=False.
    """
    loc = sum(1 for line in text.splitlines() if line.strip())
    token_estimate = math.ceil(len(text) / 4)
    try:
        template = parse_template(text)
    except ParseError:
        return TemplateMetrics(loc, 0, 0, token_estimate, parse_ok=False)
    return TemplateMetrics(
        loc=loc,
        resource_count=len(template.resources),
        parameter_count=len(template.parameters),
        token_estimate=token_estimate,
    )


def _band(value: int, bounds: tuple[int, ...]) -> int:
    for level, bound in enumerate(bounds, start=1):
        if value < bound:
            return level
    return len(bounds) + 1


def classify_difficulty(metrics: TemplateMetrics) -> int:
    """Difficulty level 1..5: the maximum of the three per-metric bands.

    Max is the conservative choice for mixed-band templates: a template is
    as hard as its hardest dimension.
    """
    return max(
        _band(metrics.loc, _LOC_BOUNDS),
        _band(metrics.resource_count, _RESOURCE_BOUNDS),
        _band(metrics.parameter_count, _PARAMETER_BOUNDS),
    )


# --- LLM reply handling ----------------------------------------------------


def extract_code_block(llm_message: str) -> str:
    """Pull the template out of a model reply.

    Returns the body of the first fenced code block; with no fences the
    whole message is returned trimmed. Raises EmptyExtraction when the
    result is blank.
    """
    match = _FENCE_RE.search(llm_message)
    text = match.group(1) if match else llm_message.strip()
    if not text.strip():
        raise EmptyExtraction("no template content in message")
    return text
