"""Resource dependency graph and deterministic topological ordering."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CycleError
from .template import Intrinsic, Template

# ${Name} and ${Resource.Attr} placeholders; ${!Literal} is an escape.
_SUB_VAR_RE = re.compile(r"\$\{([^!}][^}]*)\}")


@dataclass
class DependencyGraph:
    """Edges point from a resource to the resources it depends on."""

    nodes: list[str]
    edges: dict[str, list[str]] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)


def _sub_references(argument) -> set[str]:
    """Logical names referenced by a Sub template string (Ref/GetAtt sugar)."""
    if isinstance(argument, list) and argument:
        text = argument[0]
        local_vars = set(argument[1].keys()) if len(argument) > 1 and isinstance(argument[1], dict) else set()
    else:
        text = argument
        local_vars = set()
    if not isinstance(text, str):
        return set()
    names = set()
    for var in _SUB_VAR_RE.findall(text):
        if var in local_vars:
            continue
        names.add(var.split(".", 1)[0])
    return names


def _collect_references(value, out: set[str]) -> None:
    if isinstance(value, Intrinsic):
        if value.name == "Ref" and isinstance(value.argument, str):
            out.add(value.argument)
        elif value.name == "Fn::GetAtt":
            arg = value.argument
            if isinstance(arg, list) and arg and isinstance(arg[0], str):
                out.add(arg[0])
        elif value.name == "Fn::Sub":
            out.update(_sub_references(value.argument))
        _collect_references(value.argument, out)
    elif isinstance(value, dict):
        for v in value.values():
            _collect_references(v, out)
    elif isinstance(value, list):
        for v in value:
            _collect_references(v, out)


def dependency_graph(template: Template) -> DependencyGraph:
    """Build the inter-resource dependency graph and a topological order.

    An edge A -> B means A references B (Ref/GetAtt, including their
    Fn::Sub sugar forms) or names B in DependsOn. References to
    parameters and pseudo parameters are not edges. The returned order
    places dependencies before dependents and breaks ties by logical id
    so identical templates always order identically.

    Raises CycleError naming the logical ids on the cycle.
    """
    names = set(template.resources)
    edges: dict[str, list[str]] = {}
    for logical_id, resource in template.resources.items():
        refs: set[str] = set()
        _collect_references(resource.properties, refs)
        refs.update(resource.depends_on)
        edges[logical_id] = sorted(r for r in refs & names if r != logical_id)

    # Kahn's algorithm; the ready set is kept sorted for determinism.
    remaining_deps = {n: set(edges[n]) for n in template.resources}
    dependents: dict[str, set[str]] = {n: set() for n in template.resources}
    for node, deps in edges.items():
        for dep in deps:
            dependents[dep].add(node)

    ready = sorted(n for n, deps in remaining_deps.items() if not deps)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        inserted = []
        for dependent in dependents[node]:
            remaining_deps[dependent].discard(node)
            if not remaining_deps[dependent]:
                inserted.append(dependent)
        if inserted:
            ready = sorted(ready + inserted)

    if len(order) != len(template.resources):
        cyclic = sorted(n for n, deps in remaining_deps.items() if deps)
        raise CycleError(cyclic)

    return DependencyGraph(nodes=list(template.resources), edges=edges, order=order)
