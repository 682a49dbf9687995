"""User-intent coverage: required resources and required attributes.

Intent specs are small YAML documents declaring what a generated template
must contain to count as matching the user's request. Attribute checks
are satisfied when at least one resource of the required type carries the
property; an intrinsic at the leaf proves presence but can never satisfy
an equality check, because its literal value is unknowable statically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import EmptyRecordSet, SpecMismatch
from ..template import Intrinsic, Template
from ..validators.resource_spec import ResourceSpec, load_resource_spec

_PRESENT = object()


@dataclass(frozen=True)
class RequiredResource:
    resource_type: str
    min_count: int = 1


@dataclass(frozen=True)
class RequiredAttribute:
    resource_type: str
    property_path: str
    expected: object = _PRESENT  # _PRESENT or a literal value to equal

    @property
    def wants_equality(self) -> bool:
        return self.expected is not _PRESENT


@dataclass
class IntentSpec:
    task_id: str
    required_resources: list[RequiredResource] = field(default_factory=list)
    required_attributes: list[RequiredAttribute] = field(default_factory=list)

    def __post_init__(self):
        declared = {r.resource_type for r in self.required_resources}
        for attr in self.required_attributes:
            if attr.resource_type not in declared:
                raise ValueError(
                    f"required attribute on {attr.resource_type} has no matching required resource"
                )

    @classmethod
    def from_yaml(cls, path: str | Path) -> "IntentSpec":
        raw = yaml.safe_load(Path(path).read_text()) or {}
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "IntentSpec":
        resources = []
        for entry in raw.get("required_resources", []):
            if isinstance(entry, str):
                resources.append(RequiredResource(entry))
            else:
                resources.append(
                    RequiredResource(str(entry["type"]), int(entry.get("min_count", 1)))
                )
        attributes = []
        for entry in raw.get("required_attributes", []):
            expected = _PRESENT if "equals" not in entry else entry["equals"]
            attributes.append(
                RequiredAttribute(
                    resource_type=str(entry["resource_type"]),
                    property_path=str(entry["path"]),
                    expected=expected,
                )
            )
        return cls(
            task_id=str(raw.get("task_id", "")),
            required_resources=resources,
            required_attributes=attributes,
        )


@dataclass(frozen=True)
class IntentResult:
    resource_ok: bool
    attribute_ok: bool

    @property
    def both_ok(self) -> bool:
        return self.resource_ok and self.attribute_ok


def _lookup_path(tree, segments: list[str]):
    """All values reachable by the path; list nodes are searched item-wise."""
    if not segments:
        return [tree]
    if isinstance(tree, Intrinsic):
        return []
    head, rest = segments[0], segments[1:]
    if isinstance(tree, dict):
        if head in tree:
            return _lookup_path(tree[head], rest)
        return []
    if isinstance(tree, list):
        found = []
        for item in tree:
            found.extend(_lookup_path(item, segments))
        return found
    return []


def _attribute_satisfied(resource_properties: dict, attr: RequiredAttribute) -> bool:
    values = _lookup_path(resource_properties, attr.property_path.split("/"))
    if not values:
        return False
    if not attr.wants_equality:
        return True
    for value in values:
        if isinstance(value, Intrinsic):
            continue  # present, but not literally comparable
        if value == attr.expected or str(value) == str(attr.expected):
            return True
    return False


def eval_intent(
    template: Template, spec: IntentSpec, catalog: ResourceSpec | None = None
) -> IntentResult:
    """Score one template against one intent spec."""
    catalog = catalog or load_resource_spec()
    for required in spec.required_resources:
        if not catalog.has_type(required.resource_type):
            raise SpecMismatch(
                f"intent spec names unknown resource type '{required.resource_type}'"
            )

    by_type: dict[str, list] = {}
    for resource in template.resources.values():
        by_type.setdefault(resource.resource_type, []).append(resource)

    resource_ok = all(
        len(by_type.get(required.resource_type, [])) >= required.min_count
        for required in spec.required_resources
    )

    attribute_ok = True
    for attr in spec.required_attributes:
        candidates = by_type.get(attr.resource_type, [])
        if not any(_attribute_satisfied(c.properties, attr) for c in candidates):
            attribute_ok = False
            break

    return IntentResult(resource_ok=resource_ok, attribute_ok=attribute_ok)


def intent_coverage(results: list[IntentResult]) -> dict[str, float]:
    """Share of results hitting resource-level, attribute-level, and both."""
    if not results:
        raise EmptyRecordSet("intent_coverage needs at least one result")
    n = len(results)
    return {
        "resource_pct": 100.0 * sum(r.resource_ok for r in results) / n,
        "attribute_pct": 100.0 * sum(r.attribute_ok for r in results) / n,
        "both_pct": 100.0 * sum(r.both_ok for r in results) / n,
    }
