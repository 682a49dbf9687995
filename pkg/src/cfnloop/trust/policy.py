"""Policy-as-code security scanning and the three compliance metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ..errors import ConfigError, EmptyRecordSet
from ..template import Intrinsic, Template

SEVERITIES = ("informational", "low", "medium", "high")

_BUNDLED_POLICIES = "policies.yaml"


@dataclass(frozen=True)
class PolicyRule:
    policy_id: str
    title: str
    severity: str
    selector: str  # resource type the rule applies to
    kind: str  # present | absent | equals | not-equals | numeric-range | no-open-ingress
    path: str = ""
    value: object = None
    minimum: float | None = None
    maximum: float | None = None
    port: int | None = None


@dataclass
class PolicyCheck:
    policy_id: str
    applicable: bool
    passed: bool | None = None  # defined only when applicable
    failing_resource: str | None = None


@dataclass
class PolicyScan:
    template_id: str
    checks: list[PolicyCheck] = field(default_factory=list)

    def applicable_checks(self) -> list[PolicyCheck]:
        return [c for c in self.checks if c.applicable]

    def fully_compliant(self) -> bool:
        return all(c.passed for c in self.applicable_checks())


def load_policies(path: str | Path | None = None) -> list[PolicyRule]:
    """Load policy rules; with no path the bundled default set is used."""
    if path is None:
        text = resources.files("cfnloop.data").joinpath(_BUNDLED_POLICIES).read_text()
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"policy file not found: {path}")
        text = path.read_text()
    raw = yaml.safe_load(text) or {}
    entries = raw.get("policies", raw) if isinstance(raw, dict) else raw
    if not isinstance(entries, list):
        raise ConfigError("policy file must contain a list of policies")

    rules: list[PolicyRule] = []
    seen: set[str] = set()
    for entry in entries:
        policy_id = str(entry["id"])
        if policy_id in seen:
            raise ConfigError(f"duplicate policy id {policy_id}")
        seen.add(policy_id)
        severity = str(entry.get("severity", "low"))
        if severity not in SEVERITIES:
            raise ConfigError(f"policy {policy_id}: unknown severity {severity!r}")
        predicate = entry.get("predicate", {})
        rules.append(
            PolicyRule(
                policy_id=policy_id,
                title=str(entry.get("title", policy_id)),
                severity=severity,
                selector=str(entry["resource_type"]),
                kind=str(predicate.get("kind", "present")),
                path=str(predicate.get("path", "")),
                value=predicate.get("value"),
                minimum=predicate.get("min"),
                maximum=predicate.get("max"),
                port=predicate.get("port"),
            )
        )
    return rules


def _walk_path(tree, segments: list[str]):
    if not segments:
        return [tree]
    if isinstance(tree, Intrinsic):
        return []
    head, rest = segments[0], segments[1:]
    if isinstance(tree, dict):
        if head == "*":
            out = []
            for child in tree.values():
                out.extend(_walk_path(child, rest))
            return out
        if head in tree:
            return _walk_path(tree[head], rest)
        return []
    if isinstance(tree, list):
        if head == "*":
            out = []
            for item in tree:
                out.extend(_walk_path(item, rest))
            return out
        out = []
        for item in tree:
            out.extend(_walk_path(item, segments))
        return out
    return []


def _covers_port(entry: dict, port: int) -> bool:
    try:
        low = int(entry.get("FromPort", 0))
        high = int(entry.get("ToPort", low))
    except (TypeError, ValueError):
        return False
    if str(entry.get("IpProtocol", "")) == "-1":
        return True
    return low <= port <= high


def _ingress_open_to_port(properties: dict, port: int) -> bool:
    ingress = properties.get("SecurityGroupIngress")
    if not isinstance(ingress, list):
        return False
    for entry in ingress:
        if not isinstance(entry, dict):
            continue
        open_cidr = entry.get("CidrIp") == "0.0.0.0/0" or entry.get("CidrIpv6") == "::/0"
        if open_cidr and _covers_port(entry, port):
            return True
    return False


def _satisfies(rule: PolicyRule, properties: dict) -> bool:
    if rule.kind == "no-open-ingress":
        return not _ingress_open_to_port(properties, rule.port or 0)
    values = _walk_path(properties, rule.path.split("/")) if rule.path else []
    if rule.kind == "present":
        return bool(values)
    if rule.kind == "absent":
        return not values
    if rule.kind == "equals":
        return any(
            not isinstance(v, Intrinsic) and (v == rule.value or str(v) == str(rule.value))
            for v in values
        )
    if rule.kind == "not-equals":
        return all(
            isinstance(v, Intrinsic) or (v != rule.value and str(v) != str(rule.value))
            for v in values
        )
    if rule.kind == "numeric-range":
        if not values:
            return False
        for v in values:
            try:
                number = float(v)
            except (TypeError, ValueError):
                return False
            if rule.minimum is not None and number < rule.minimum:
                return False
            if rule.maximum is not None and number > rule.maximum:
                return False
        return True
    raise ConfigError(f"policy {rule.policy_id}: unknown predicate kind {rule.kind!r}")


def scan_security(
    template: Template, policies: list[PolicyRule] | None = None, template_id: str = ""
) -> PolicyScan:
    """Evaluate each policy against all resources of its selector type.

    A policy is applicable when the template has at least one resource of
    the selector type, and passes when every such resource satisfies the
    predicate. Severity never affects pass/fail, only reporting.
    """
    policies = policies if policies is not None else load_policies()
    scan = PolicyScan(template_id=template_id)
    for rule in policies:
        selected = [
            (logical_id, resource)
            for logical_id, resource in template.resources.items()
            if resource.resource_type == rule.selector
        ]
        if not selected:
            scan.checks.append(PolicyCheck(rule.policy_id, applicable=False))
            continue
        failing = None
        for logical_id, resource in selected:
            properties = resource.properties if isinstance(resource.properties, dict) else {}
            if not _satisfies(rule, properties):
                failing = logical_id
                break
        scan.checks.append(
            PolicyCheck(rule.policy_id, applicable=True, passed=failing is None, failing_resource=failing)
        )
    return scan


def compliance_rates(scans: list[PolicyScan]) -> dict[str, float | None]:
    """Policy-pass, unfiltered-compliance, and filtered-compliance rates.

    Templates with zero applicable checks count as passing in the
    unfiltered rate (vacuous truth) and are excluded from the filtered
    rate, which is None when no template has applicable checks.
    """
    if not scans:
        raise EmptyRecordSet("compliance_rates needs at least one scan")

    applicable = sum(len(s.applicable_checks()) for s in scans)
    passed = sum(1 for s in scans for c in s.applicable_checks() if c.passed)
    policy_pass = 100.0 * passed / applicable if applicable else 100.0

    unfiltered = 100.0 * sum(1 for s in scans if s.fully_compliant()) / len(scans)

    with_applicable = [s for s in scans if s.applicable_checks()]
    if with_applicable:
        filtered = 100.0 * sum(1 for s in with_applicable if s.fully_compliant()) / len(with_applicable)
    else:
        filtered = None

    return {
        "policy_pass_pct": policy_pass,
        "unfiltered_pct": unfiltered,
        "filtered_pct": filtered,
    }
