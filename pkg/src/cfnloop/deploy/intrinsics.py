"""Intrinsic function evaluation against a resolution context.

Evaluation happens at provision time, after parameters are resolved and
with physical ids for already-provisioned resources available. Failures
raise EvalError with a machine-readable kind; the engine converts those
into deployment failures.
"""

from __future__ import annotations

import base64
import re
from dataclasses import dataclass, field
from typing import Any

from ..errors import EvalError
from ..template import Intrinsic

_SUB_VAR_RE = re.compile(r"\$\{(!?[^}]*)\}")

# Marker produced by Ref AWS::NoValue; tree resolution prunes it.
NO_VALUE = object()


@dataclass
class ResolutionContext:
    region: str
    az_list: list[str]
    stack_name: str = ""
    account_id: str = "123456789012"
    partition: str = "aws"
    url_suffix: str = "amazonaws.com"
    parameters: dict[str, Any] = field(default_factory=dict)
    physical_ids: dict[str, str] = field(default_factory=dict)
    resource_types: dict[str, str] = field(default_factory=dict)
    mappings: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)

    def pseudo(self, name: str):
        return {
            "AWS::Region": self.region,
            "AWS::AccountId": self.account_id,
            "AWS::StackName": self.stack_name,
            "AWS::Partition": self.partition,
            "AWS::URLSuffix": self.url_suffix,
            "AWS::NoValue": NO_VALUE,
        }.get(name)


def _ref(ctx: ResolutionContext, target: Any):
    if not isinstance(target, str):
        raise EvalError("unknown-target", f"Ref argument must be a string, got {target!r}")
    pseudo = ctx.pseudo(target)
    if pseudo is not None:
        return pseudo
    if target in ctx.parameters:
        return ctx.parameters[target]
    if target in ctx.physical_ids:
        return ctx.physical_ids[target]
    raise EvalError("unknown-target", f"Ref target '{target}' cannot be resolved")


def _synthesize_attribute(ctx: ResolutionContext, logical: str, attr: str) -> str:
    physical = ctx.physical_ids[logical]
    if attr == "Arn" or attr.endswith("Arn"):
        rtype = ctx.resource_types.get(logical, "AWS::Unknown::Unknown")
        service = rtype.split("::")[1].lower() if "::" in rtype else "unknown"
        return f"arn:{ctx.partition}:{service}:{ctx.region}:{ctx.account_id}:{physical}"
    if attr.endswith("Id"):
        return physical
    return f"{physical}.{attr}"


def _getatt(ctx: ResolutionContext, arg: Any):
    if isinstance(arg, str):
        logical, _, attr = arg.partition(".")
        arg = [logical, attr]
    if not (isinstance(arg, list) and len(arg) >= 2):
        raise EvalError("unknown-target", f"Fn::GetAtt expects [logicalId, attribute], got {arg!r}")
    logical, attr = str(arg[0]), str(arg[1])
    if logical not in ctx.physical_ids:
        raise EvalError("unknown-target", f"Fn::GetAtt target '{logical}' cannot be resolved")
    return _synthesize_attribute(ctx, logical, attr)


def _scalar_str(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _sub(ctx: ResolutionContext, arg: Any):
    local_vars: dict[str, Any] = {}
    if isinstance(arg, list):
        text = arg[0] if arg else ""
        if len(arg) > 1 and isinstance(arg[1], dict):
            local_vars = {k: evaluate_intrinsic(ctx, v) if isinstance(v, Intrinsic) else v for k, v in arg[1].items()}
    else:
        text = arg
    if not isinstance(text, str):
        raise EvalError("unknown-target", f"Fn::Sub template must be a string, got {text!r}")

    def replace(match: re.Match) -> str:
        var = match.group(1)
        if var.startswith("!"):
            return "${" + var[1:] + "}"
        if var in local_vars:
            return _scalar_str(local_vars[var])
        if "." in var:
            logical, attr = var.split(".", 1)
            if logical in ctx.physical_ids:
                return _synthesize_attribute(ctx, logical, attr)
            pseudo = ctx.pseudo(var)
            if pseudo is not None and pseudo is not NO_VALUE:
                return _scalar_str(pseudo)
            raise EvalError("unknown-target", f"Fn::Sub variable '{var}' cannot be resolved")
        return _scalar_str(_ref(ctx, var))

    return _SUB_VAR_RE.sub(replace, text)


def evaluate_condition(ctx: ResolutionContext, name: str) -> bool:
    if name not in ctx.conditions:
        raise EvalError("unknown-target", f"condition '{name}' is not defined")
    return bool(evaluate_intrinsic(ctx, ctx.conditions[name]))


def evaluate_intrinsic(ctx: ResolutionContext, node: Any):
    """Evaluate one node (Intrinsic or plain value) to a concrete value."""
    if not isinstance(node, Intrinsic):
        return node
    name, arg = node.name, node.argument

    if name == "Ref":
        return _ref(ctx, arg)
    if name == "Fn::GetAtt":
        return _getatt(ctx, arg)
    if name == "Fn::Sub":
        return _sub(ctx, arg)
    if name == "Fn::Join":
        if not (isinstance(arg, list) and len(arg) == 2):
            raise EvalError("unknown-target", f"Fn::Join expects [delimiter, list], got {arg!r}")
        delim, items = str(arg[0]), resolve_tree(ctx, arg[1])
        if not isinstance(items, list):
            raise EvalError("unknown-target", "Fn::Join expects [delimiter, list]")
        return delim.join(_scalar_str(i) for i in items)
    if name == "Fn::Select":
        if not (isinstance(arg, list) and len(arg) == 2):
            raise EvalError("index-out-of-range", f"Fn::Select expects [index, list], got {arg!r}")
        index = evaluate_intrinsic(ctx, arg[0])
        items = resolve_tree(ctx, arg[1])
        try:
            index = int(index)
        except (TypeError, ValueError):
            raise EvalError("index-out-of-range", f"Fn::Select index {index!r} is not an integer")
        if not isinstance(items, list) or not 0 <= index < len(items):
            raise EvalError(
                "index-out-of-range",
                f"Fn::Select index {index} out of range for list of length "
                f"{len(items) if isinstance(items, list) else 0}",
            )
        return items[index]
    if name == "Fn::Split":
        if not (isinstance(arg, list) and len(arg) == 2):
            raise EvalError("unknown-target", f"Fn::Split expects [delimiter, string], got {arg!r}")
        delim = str(arg[0])
        value = evaluate_intrinsic(ctx, arg[1])
        return _scalar_str(value).split(delim)
    if name == "Fn::GetAZs":
        region = _scalar_str(evaluate_intrinsic(ctx, arg)) if arg != "" else ""
        if region in ("", ctx.region):
            return list(ctx.az_list)
        return [f"{region}{suffix}" for suffix in ("a", "b", "c")]
    if name == "Fn::FindInMap":
        if not (isinstance(arg, list) and len(arg) >= 3):
            raise EvalError("missing-mapping-key", f"Fn::FindInMap expects [map, key, key], got {arg!r}")
        map_name = evaluate_intrinsic(ctx, arg[0])
        top = _scalar_str(evaluate_intrinsic(ctx, arg[1]))
        second = _scalar_str(evaluate_intrinsic(ctx, arg[2]))
        mapping = ctx.mappings.get(map_name)
        if not isinstance(mapping, dict):
            raise EvalError("missing-mapping-key", f"mapping '{map_name}' is not defined")
        level = {_scalar_str(k): v for k, v in mapping.items()}
        if top not in level or not isinstance(level[top], dict):
            raise EvalError("missing-mapping-key", f"key '{top}' not found in mapping '{map_name}'")
        inner = {_scalar_str(k): v for k, v in level[top].items()}
        if second not in inner:
            raise EvalError(
                "missing-mapping-key", f"key '{top}.{second}' not found in mapping '{map_name}'"
            )
        return resolve_tree(ctx, inner[second])
    if name == "Fn::If":
        if not (isinstance(arg, list) and len(arg) == 3):
            raise EvalError("unknown-target", f"Fn::If expects [condition, then, else], got {arg!r}")
        branch = arg[1] if evaluate_condition(ctx, str(arg[0])) else arg[2]
        return resolve_tree(ctx, branch)
    if name == "Fn::Equals":
        if not (isinstance(arg, list) and len(arg) == 2):
            raise EvalError("unknown-target", f"Fn::Equals expects two operands, got {arg!r}")
        left, right = (evaluate_intrinsic(ctx, a) for a in arg)
        return _scalar_str(left) == _scalar_str(right)
    if name == "Fn::And":
        if not isinstance(arg, list):
            raise EvalError("unknown-target", "Fn::And expects a list of conditions")
        return all(bool(evaluate_intrinsic(ctx, a)) for a in arg)
    if name == "Fn::Or":
        if not isinstance(arg, list):
            raise EvalError("unknown-target", "Fn::Or expects a list of conditions")
        return any(bool(evaluate_intrinsic(ctx, a)) for a in arg)
    if name == "Fn::Not":
        inner = arg[0] if isinstance(arg, list) else arg
        return not bool(evaluate_intrinsic(ctx, inner))
    if name == "Condition":
        return evaluate_condition(ctx, str(arg))
    if name == "Fn::Base64":
        return base64.b64encode(_scalar_str(evaluate_intrinsic(ctx, arg)).encode()).decode()
    if name == "Fn::ImportValue":
        raise EvalError("unsupported-cross-stack", "Fn::ImportValue requires cross-stack exports, which are not supported")
    raise EvalError("unknown-target", f"intrinsic function '{name}' cannot be evaluated")


def resolve_tree(ctx: ResolutionContext, value: Any):
    """Evaluate an entire property tree, pruning Ref AWS::NoValue leaves."""
    if isinstance(value, Intrinsic):
        return evaluate_intrinsic(ctx, value)
    if isinstance(value, dict):
        out = {}
        for key, child in value.items():
            resolved = resolve_tree(ctx, child)
            if resolved is not NO_VALUE:
                out[key] = resolved
        return out
    if isinstance(value, list):
        resolved_items = [resolve_tree(ctx, v) for v in value]
        return [v for v in resolved_items if v is not NO_VALUE]
    return value
