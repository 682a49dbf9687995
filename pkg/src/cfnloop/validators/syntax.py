"""Stage 2: CloudFormation syntax checking against the resource spec.

Walks the parsed template in document order so violation lists are
deterministic. Only structural correctness is judged here; semantic value
checks (registry existence, uniqueness) belong to the deployment stage.
"""

from __future__ import annotations

import re
from typing import Any

from ..stages import Stage, StageReport, SyntaxViolation
from ..template import (
    ALLOWED_SECTIONS,
    PSEUDO_PARAMETERS,
    SUPPORTED_INTRINSICS,
    Intrinsic,
    Template,
    has_conventional_type,
)
from .resource_spec import ResourceSpec

# ${Name} placeholders; ${!Literal} is the escaped literal form.
_SUB_VAR_RE = re.compile(r"\$\{([^!}][^}]*)\}")

# Resource types that exist in CloudFormation but depend on features the
# pipeline does not model (nested stacks, macros).
_UNSUPPORTED_RESOURCE_TYPES = {
    "AWS::CloudFormation::Stack": "nested stacks are not supported",
    "AWS::CloudFormation::Macro": "macros are not supported",
}


class _Checker:
    def __init__(self, template: Template, spec: ResourceSpec):
        self.template = template
        self.spec = spec
        self.violations: list[SyntaxViolation] = []
        self.referencable = set(template.parameters) | set(template.resources) | set(PSEUDO_PARAMETERS)

    def add(self, path: str, rule_id: str, message: str) -> None:
        self.violations.append(SyntaxViolation(path=path, rule_id=rule_id, message=message))

    # -- section level ------------------------------------------------

    def check_sections(self) -> None:
        for key in self.template.unknown_sections:
            self.add(key, "unknown-section", f"'{key}' is not a valid template section")
        if self.template.transform is not None:
            self.add("Transform", "unsupported-feature", "template transforms are not supported")
        if not self.template.resources:
            self.add("Resources", "missing-required", "template must declare at least one resource")

    # -- resources ----------------------------------------------------

    def check_resources(self) -> None:
        for logical_id, resource in self.template.resources.items():
            base = f"Resources/{logical_id}"
            rtype = resource.resource_type
            if rtype in _UNSUPPORTED_RESOURCE_TYPES:
                self.add(base, "unsupported-feature", _UNSUPPORTED_RESOURCE_TYPES[rtype])
                continue
            if not has_conventional_type(rtype) or not self.spec.has_type(rtype):
                self.add(base, "unknown-resource-type", f"Invalid or unsupported Type {rtype or '(none)'}")
                self.walk(resource.properties, f"{base}/Properties")
                continue

            props = self.spec.properties(rtype)
            if isinstance(resource.properties, dict):
                for prop_name in resource.properties:
                    if prop_name not in props:
                        self.add(
                            f"{base}/Properties/{prop_name}",
                            "additional-property",
                            f"Additional properties are not allowed ('{prop_name}' was unexpected)",
                        )
                declared = set(resource.properties)
            else:
                declared = set()
            for prop_name in self.spec.required_properties(rtype):
                if prop_name not in declared:
                    self.add(
                        f"{base}/Properties/{prop_name}",
                        "missing-required",
                        f"'{prop_name}' is a required property",
                    )

            for target in resource.depends_on:
                if target not in self.template.resources:
                    self.add(
                        f"{base}/DependsOn",
                        "bad-ref-target",
                        f"DependsOn target '{target}' is not a resource in this template",
                    )
            if resource.condition is not None and resource.condition not in self.template.conditions:
                self.add(
                    f"{base}/Condition",
                    "bad-ref-target",
                    f"Condition '{resource.condition}' is not defined",
                )
            self.walk(resource.properties, f"{base}/Properties")

    # -- outputs ------------------------------------------------------

    def check_outputs(self) -> None:
        for name, body in self.template.outputs.items():
            self.walk(body, f"Outputs/{name}")

    # -- intrinsic walk -----------------------------------------------

    def walk(self, value: Any, path: str) -> None:
        if isinstance(value, Intrinsic):
            self.check_intrinsic(value, path)
        elif isinstance(value, dict):
            for key, child in value.items():
                self.walk(child, f"{path}/{key}")
        elif isinstance(value, list):
            for i, child in enumerate(value):
                self.walk(child, f"{path}/{i}")

    def check_intrinsic(self, node: Intrinsic, path: str) -> None:
        if node.name not in SUPPORTED_INTRINSICS:
            self.add(path, "unsupported-feature", f"intrinsic function '{node.name}' is not supported")
            self.walk(node.argument, path)
            return

        if node.name == "Ref":
            target = node.argument
            if not isinstance(target, str) or target not in self.referencable:
                self.add(
                    path,
                    "bad-ref-target",
                    f"Ref target '{target}' is not a parameter, resource, or pseudo parameter",
                )
        elif node.name == "Fn::GetAtt":
            self.check_getatt(node.argument, path)
        elif node.name == "Fn::Sub":
            self.check_sub(node.argument, path)
        elif node.name == "Fn::If":
            arg = node.argument
            if isinstance(arg, list) and arg and isinstance(arg[0], str):
                if arg[0] not in self.template.conditions:
                    self.add(path, "bad-ref-target", f"Condition '{arg[0]}' is not defined")

        self.walk(node.argument, path)

    def check_getatt(self, arg: Any, path: str) -> None:
        if not (isinstance(arg, list) and len(arg) >= 2 and isinstance(arg[0], str)):
            self.add(path, "bad-ref-target", "Fn::GetAtt expects [logicalId, attributeName]")
            return
        logical, attr = arg[0], arg[1]
        resource = self.template.resources.get(logical)
        if resource is None:
            self.add(path, "bad-ref-target", f"Fn::GetAtt target '{logical}' is not a resource")
            return
        attrs = self.spec.attributes(resource.resource_type)
        if attrs and isinstance(attr, str) and attr not in attrs:
            self.add(
                path,
                "bad-ref-target",
                f"'{attr}' is not an attribute of {resource.resource_type}",
            )

    def check_sub(self, arg: Any, path: str) -> None:
        local_vars: set[str] = set()
        if isinstance(arg, list):
            text = arg[0] if arg else ""
            if len(arg) > 1 and isinstance(arg[1], dict):
                local_vars = set(arg[1].keys())
        else:
            text = arg
        if not isinstance(text, str):
            return
        variables = _SUB_VAR_RE.findall(text)
        if not variables and not local_vars:
            self.add(path, "null-sub", "'Fn::Sub' isn't needed because there are no variables")
            return
        for var in variables:
            if var in local_vars:
                continue
            target = var.split(".", 1)[0]
            if target not in self.referencable:
                self.add(
                    path,
                    "bad-ref-target",
                    f"Fn::Sub variable '{var}' names no parameter, resource, or pseudo parameter",
                )


def check_syntax(template: Template, spec: ResourceSpec) -> StageReport:
    """Run the syntax stage over a parsed template."""
    checker = _Checker(template, spec)
    checker.check_sections()
    checker.check_resources()
    checker.check_outputs()
    return StageReport(Stage.SYNTAX, checker.violations)
