"""Run the 12-task desk benchmark with a scripted model and print the report.

The script fabricates a reply queue per task: some tasks succeed at once,
others need a repair iteration or two. The resulting report shows
passItr@n, the first-failure stage distribution, error categories, and
the feedback level each success needed.
"""

import tempfile
from pathlib import Path

import yaml

from cfnloop.bench.experiment import run_experiment
from cfnloop.bench.metrics import build_report, render_text_report
from cfnloop.config import load_config

ROOT = Path(__file__).parent.parent
MANIFEST = ROOT / "benchmarks" / "desk" / "manifest.yaml"

BAD_YAML = "Resources:\n\tBroken:\n"
BAD_PROPERTY = "Resources:\n  B:\n    Type: AWS::S3::Bucket\n    Properties:\n      BucketNam: oops\n"
NO_VALUE = "Parameters:\n  KeyName:\n    Type: AWS::EC2::KeyPair::KeyName\nResources:\n  T:\n    Type: AWS::SNS::Topic\n"


def fenced(text):
    return f"```yaml\n{text}```"


entries = yaml.safe_load(MANIFEST.read_text())
library = {}
for i, entry in enumerate(entries):
    reference = fenced((MANIFEST.parent / entry["reference"]).read_text())
    stumbles = [[], [fenced(BAD_YAML)], [fenced(BAD_PROPERTY)], [fenced(NO_VALUE), fenced(BAD_PROPERTY)]][i % 4]
    library[entry["id"]] = stumbles + [reference]

with tempfile.TemporaryDirectory() as workdir:
    fixture = Path(workdir) / "replies.yaml"
    fixture.write_text(yaml.safe_dump(library, sort_keys=True))
    config = load_config(
        None,
        {
            "manifest": str(MANIFEST),
            "script": str(fixture),
            "out_dir": str(Path(workdir) / "experiment"),
            "model": "scripted-demo",
        },
    )
    records = run_experiment(config, provider_kind="script")
    difficulties = {e["id"]: e["difficulty"] for e in entries}
    print(render_text_report(build_report(records, difficulties=difficulties)))
