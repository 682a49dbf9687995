"""Robustness: arbitrary or mutated model output never crashes the pipeline.

Failures must come back as stage reports (or final statuses), never as
exceptions escaping the loop.
"""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from cfnloop.orchestrator.runner import _validate_once
from cfnloop.stages import Stage
from cfnloop.validators import check_format, load_resource_spec
from cfnloop.deploy import new_environment
from cfnloop.errors import EmptyExtraction
from cfnloop.template import extract_code_block

from conftest import DESK_TEMPLATES


def _mutate(text: str, rng: random.Random) -> str:
    lines = text.splitlines()
    op = rng.randrange(7)
    if op == 0 and len(lines) > 2:  # drop a random line
        del lines[rng.randrange(len(lines))]
    elif op == 1 and lines:  # tab-corrupt an indent
        i = rng.randrange(len(lines))
        lines[i] = "\t" + lines[i]
    elif op == 2 and lines:  # damage a property name
        i = rng.randrange(len(lines))
        lines[i] = lines[i].replace("e", "3", 1)
    elif op == 3 and lines:  # duplicate a line
        i = rng.randrange(len(lines))
        lines.insert(i, lines[i])
    elif op == 4 and lines:  # pad brackets
        i = rng.randrange(len(lines))
        lines[i] = lines[i].replace("[", "[ ").replace("]", " ]")
    elif op == 5 and lines:  # truncate mid-document
        lines = lines[: rng.randrange(1, len(lines) + 1)]
    else:  # inject garbage
        lines.insert(rng.randrange(len(lines) + 1), rng.choice(["  - ]", "::", "x: {", "\x00?", "!Ref"]))
    return "\n".join(lines)


class TestMutationFuzz:
    def test_mutated_references_never_crash(self, resource_spec):
        rng = random.Random(2024)
        sources = [p.read_text() for p in sorted(DESK_TEMPLATES.glob("*.yaml"))]
        for _ in range(250):
            text = rng.choice(sources)
            for _ in range(rng.randint(1, 4)):
                text = _mutate(text, rng)
            reply = f"```yaml\n{text}\n```"
            report, _template_text = _validate_once(reply, resource_spec, new_environment, {})
            if report is not None:
                assert report.stage in (Stage.FORMAT, Stage.SYNTAX, Stage.DEPLOYMENT)
                assert report.violations


class TestArbitraryTextFuzz:
    @given(st.text(max_size=400))
    @settings(max_examples=200, deadline=None)
    def test_format_stage_total(self, text):
        report = check_format(text)
        assert isinstance(report.passed, bool)

    @given(st.text(max_size=400))
    @settings(max_examples=200, deadline=None)
    def test_extraction_total(self, text):
        try:
            extracted = extract_code_block(text)
            assert extracted.strip()
        except EmptyExtraction:
            pass

    @given(st.text(max_size=300))
    @settings(max_examples=150, deadline=None)
    def test_full_pipeline_total(self, text):
        spec = load_resource_spec()
        report, _ = _validate_once(text, spec, new_environment, {})
        if report is not None:
            assert report.stage in (Stage.FORMAT, Stage.SYNTAX, Stage.DEPLOYMENT)
