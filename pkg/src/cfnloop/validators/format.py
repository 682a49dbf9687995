"""Stage 1: format verification.

A fixed five-rule subset of common YAML-lint checks: parse failures,
duplicate keys, indentation problems (tabs, inconsistent steps), trailing
whitespace, and padded flow-sequence brackets. Violations are reported,
never raised, and come back ordered by line then column. JSON input gets
the parse and duplicate-key rules only.
"""

from __future__ import annotations

import re

from ..errors import DuplicateKeyError, ParseError
from ..stages import FormatViolation, Stage, StageReport
from ..template import load_strict_json, load_strict_yaml

_BLOCK_SCALAR_RE = re.compile(r"(?:^|\s)[|>][+-]?[0-9]*\s*$")


def _strip_comment(line: str) -> str:
    """Remove a trailing YAML comment, respecting quoted strings."""
    quote: str | None = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in ("'", '"'):
            quote = ch
        elif ch == "#" and (i == 0 or line[i - 1] in " \t"):
            return line[:i]
    return line


def _unquoted_spans(text: str):
    """Yield (start, end) index ranges of text lying outside quotes."""
    quote: str | None = None
    start = 0
    for i, ch in enumerate(text):
        if quote:
            if ch == quote:
                quote = None
                start = i + 1
        elif ch in ("'", '"'):
            if i > start:
                yield start, i
            quote = ch
    if quote is None and len(text) > start:
        yield start, len(text)


def _indent_of(line: str) -> int:
    return len(line) - len(line.lstrip(" \t"))


def _effective_indent(content: str) -> int:
    """Indent of a line's payload: sequence dashes widen the content level."""
    i = _indent_of(content)
    rest = content[i:]
    while rest.startswith("- "):
        i += 2
        rest = rest[2:]
    if rest.rstrip() == "-":
        i += 2
    return i


def _scan_lines(text: str) -> list[FormatViolation]:
    violations: list[FormatViolation] = []
    lines = text.splitlines()

    block_scalar_indent: int | None = None  # indent of the line that opened it
    flow_depth = 0
    indent_stack = [0]
    indent_unit: int | None = None

    for lineno, raw in enumerate(lines, start=1):
        if raw != raw.rstrip():
            violations.append(
                FormatViolation(lineno, len(raw.rstrip()) + 1, "trailing-space", f"Line {lineno}: trailing spaces")
            )

        stripped = raw.strip()
        if block_scalar_indent is not None:
            if not stripped or _indent_of(raw) > block_scalar_indent:
                continue  # still inside the scalar body
            block_scalar_indent = None
        if not stripped:
            continue

        content = _strip_comment(raw)
        if not content.strip():
            continue

        indent_ws = raw[: _indent_of(raw)]
        if "\t" in indent_ws:
            violations.append(
                FormatViolation(
                    lineno,
                    indent_ws.index("\t") + 1,
                    "indentation",
                    f"Line {lineno}: found tab character in indentation",
                )
            )

        if flow_depth == 0:
            indent = _indent_of(raw)
            while len(indent_stack) > 1 and indent_stack[-1] > indent:
                indent_stack.pop()
            if indent > indent_stack[-1]:
                step = indent - indent_stack[-1]
                if indent_unit is None:
                    indent_unit = step
                elif step != indent_unit:
                    violations.append(
                        FormatViolation(
                            lineno,
                            1,
                            "indentation",
                            f"Line {lineno}: wrong indentation: expected {indent_stack[-1] + indent_unit}"
                            f" spaces but found {indent}",
                        )
                    )
                indent_stack.append(_effective_indent(content))
            elif indent == indent_stack[-1]:
                effective = _effective_indent(content)
                if effective > indent:
                    indent_stack.append(effective)

        for start, end in _unquoted_spans(content):
            span = content[start:end]
            for m in re.finditer(r"\[( +)(?=\S)", span):
                violations.append(
                    FormatViolation(
                        lineno,
                        start + m.start(1) + 1,
                        "brackets-spacing",
                        f"Line {lineno}: too many spaces inside brackets",
                    )
                )
            for m in re.finditer(r"(?<=\S)( +)\]", span):
                if span[m.start(1) - 1] == "[":
                    continue  # the opening-side match already covers "[ ]"
                violations.append(
                    FormatViolation(
                        lineno,
                        start + m.start(1) + 1,
                        "brackets-spacing",
                        f"Line {lineno}: too many spaces inside brackets",
                    )
                )
            flow_depth += span.count("[") + span.count("{") - span.count("]") - span.count("}")
        flow_depth = max(flow_depth, 0)

        if flow_depth == 0 and _BLOCK_SCALAR_RE.search(content):
            block_scalar_indent = _indent_of(raw)

    return violations


def check_format(text: str) -> StageReport:
    """Run the format stage over raw template text."""
    violations: list[FormatViolation] = []

    if text.lstrip().startswith("{"):
        try:
            doc = load_strict_json(text)
            if not isinstance(doc, dict):
                violations.append(
                    FormatViolation(1, 1, "parse-failure", "Line 1: document root is not an object")
                )
        except DuplicateKeyError as exc:
            line = exc.line or 1
            violations.append(
                FormatViolation(line, exc.column, "duplicate-key", f'Line {line}: duplicate key "{exc.key}"')
            )
        except ParseError as exc:
            line = exc.line or 1
            violations.append(
                FormatViolation(line, exc.column, "parse-failure", f"Line {line}: syntax error: {exc}")
            )
        return StageReport(Stage.FORMAT, violations)

    violations.extend(_scan_lines(text))
    try:
        doc = load_strict_yaml(text)
        if doc is None:
            violations.append(FormatViolation(1, 1, "parse-failure", "Line 1: empty document"))
        elif not isinstance(doc, dict):
            violations.append(
                FormatViolation(1, 1, "parse-failure", "Line 1: document root is not a mapping")
            )
    except DuplicateKeyError as exc:
        line = exc.line or 1
        violations.append(
            FormatViolation(line, exc.column, "duplicate-key", f'Line {line}: duplicate key "{exc.key}"')
        )
    except ParseError as exc:
        line = exc.line or 1
        violations.append(
            FormatViolation(line, exc.column, "parse-failure", f"Line {line}: syntax error: {exc}")
        )

    violations.sort(key=lambda v: (v.line, v.column or 0, v.rule_id))
    return StageReport(Stage.FORMAT, violations)
