import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from cfnloop.cli import main
from cfnloop.config import load_config
from cfnloop.errors import ConfigError

from conftest import DESK_MANIFEST, DESK_TEMPLATES, SNS_TEMPLATE_WITH_DEFAULT, fenced

BAD_YAML = "Resources:\n\tBroken:\n"
BAD_SYNTAX = "Resources:\n  B:\n    Type: AWS::S3::Bucket\n    Properties:\n      BucketNam: oops\n"
MISSING_VALUE = (
    "Parameters:\n"
    "  KeyName:\n"
    "    Type: AWS::EC2::KeyPair::KeyName\n"
    "Resources:\n"
    "  T:\n"
    "    Type: AWS::SNS::Topic\n"
)


class TestLoadConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("")
        config = load_config(path)
        assert config.temperature == 0.0
        assert config.max_output_tokens == 8000
        assert (config.general_attempts, config.detailed_attempts, config.human_attempts) == (2, 4, 4)
        assert (config.global_cap, config.global_cap_human) == (15, 25)

    def test_cli_flag_beats_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("global_cap: 15\n")
        config = load_config(path, {"global_cap": 10})
        assert config.global_cap == 10

    def test_none_override_ignored(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("model: from-file\n")
        config = load_config(path, {"model": None})
        assert config.model == "from-file"

    def test_missing_manifest_rejected(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("manifest: /does/not/exist.yaml\n")
        with pytest.raises(ConfigError) as excinfo:
            load_config(path)
        assert any("manifest" in p for p in excinfo.value.problems)

    def test_all_problems_listed(self):
        with pytest.raises(ConfigError) as excinfo:
            load_config(None, {"workers": 0, "history_mode": "sometimes", "bogus_field": 1})
        assert len(excinfo.value.problems) == 3


def write_script_fixture(path: Path, manifest_path: Path) -> dict:
    """Scripted replies with a deterministic mix of failure shapes."""
    entries = yaml.safe_load(manifest_path.read_text())
    library = {}
    for i, entry in enumerate(entries):
        reference = (manifest_path.parent / entry["reference"]).read_text()
        if i % 4 == 1:
            replies = [fenced(BAD_YAML), fenced(reference)]
        elif i % 4 == 2:
            replies = [fenced(BAD_SYNTAX), fenced(MISSING_VALUE), fenced(reference)]
        else:
            replies = [fenced(reference)]
        library[entry["id"]] = replies
    path.write_text(yaml.safe_dump(library, sort_keys=True))
    return library


class TestValidateCommand:
    def test_good_template(self, tmp_path):
        target = tmp_path / "ok.yaml"
        target.write_text(SNS_TEMPLATE_WITH_DEFAULT)
        result = CliRunner().invoke(main, ["validate", str(target)])
        assert result.exit_code == 0
        assert "syntax stage passed" in result.output

    def test_bad_template_exits_one(self, tmp_path):
        target = tmp_path / "bad.yaml"
        target.write_text(BAD_SYNTAX)
        result = CliRunner().invoke(main, ["validate", str(target)])
        assert result.exit_code == 1
        assert "BucketNam" in result.output


class TestDeploySimCommand:
    def test_deploys_reference(self):
        result = CliRunner().invoke(
            main, ["deploy-sim", str(DESK_TEMPLATES / "t02-sns-email.yaml")]
        )
        assert result.exit_code == 0
        assert "CREATE_COMPLETE" in result.output

    def test_missing_value_exits_one_with_message(self, tmp_path):
        target = tmp_path / "needs-key.yaml"
        target.write_text(MISSING_VALUE)
        result = CliRunner().invoke(main, ["deploy-sim", str(target)])
        assert result.exit_code == 1
        assert "Parameters: [KeyName] must have values" in result.output

    def test_param_override(self, tmp_path):
        target = tmp_path / "needs-key.yaml"
        target.write_text(MISSING_VALUE)
        result = CliRunner().invoke(
            main, ["deploy-sim", str(target), "--param", "KeyName=sim-keypair"]
        )
        assert result.exit_code == 0


class TestGenerateCommand:
    def test_scripted_loop(self, tmp_path):
        fixture = tmp_path / "replies.yaml"
        fixture.write_text(yaml.safe_dump({"adhoc": [fenced(BAD_YAML), fenced(SNS_TEMPLATE_WITH_DEFAULT)]}))
        result = CliRunner().invoke(
            main,
            ["generate", "--prompt", "an sns topic", "--provider", "script", "--script", str(fixture)],
        )
        assert result.exit_code == 0
        assert "deployed at iteration 2" in result.output
        assert "NotificationTopic" in result.output

    def test_failed_loop_exits_one(self, tmp_path):
        fixture = tmp_path / "replies.yaml"
        fixture.write_text(yaml.safe_dump({"adhoc": [fenced(BAD_YAML)] * 6}))
        result = CliRunner().invoke(
            main,
            ["generate", "--prompt", "anything", "--provider", "script", "--script", str(fixture)],
        )
        assert result.exit_code == 1


class TestTrustCommands:
    def test_intent_eval(self, tmp_path):
        template = DESK_TEMPLATES / "t01-artifact-bucket.yaml"
        spec = DESK_MANIFEST.parent / "intents" / "t01-artifact-bucket.yaml"
        result = CliRunner().invoke(main, ["intent-eval", "--template", str(template), "--spec", str(spec)])
        assert result.exit_code == 0
        assert json.loads(result.output)["both_ok"] is True

    def test_security_scan_fails_on_open_sns(self, tmp_path):
        target = tmp_path / "topic.yaml"
        target.write_text("Resources:\n  T:\n    Type: AWS::SNS::Topic\n")
        result = CliRunner().invoke(main, ["security-scan", "--template", str(target)])
        assert result.exit_code == 1
        summary = json.loads(result.output)
        assert summary["compliant"] is False
        assert summary["failed"][0]["policy_id"] == "SIM-SNS-001"

    def test_security_scan_passes_compliant_template(self):
        result = CliRunner().invoke(
            main, ["security-scan", "--template", str(DESK_TEMPLATES / "t12-event-pipeline.yaml")]
        )
        assert result.exit_code == 0


class TestBenchCommands:
    def test_run_and_report(self, tmp_path):
        fixture = tmp_path / "replies.yaml"
        write_script_fixture(fixture, DESK_MANIFEST)
        out_dir = tmp_path / "exp"
        result = CliRunner().invoke(
            main,
            [
                "bench", "run",
                "--manifest", str(DESK_MANIFEST),
                "--provider", "script",
                "--script", str(fixture),
                "--model", "scripted-mix",
                "--out", str(out_dir),
            ],
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "runs.jsonl").exists()
        assert (out_dir / "config.yaml").exists()
        assert (out_dir / "report.json").exists()
        report = json.loads((out_dir / "report.json").read_text())
        assert report["total_runs"] == 12
        assert report["pass_itr_at"]["15"] == 100.0

        report_result = CliRunner().invoke(main, ["bench", "report", "--in", str(out_dir), "--at", "1,5,10,15"])
        assert report_result.exit_code == 0
        assert "passItr@n" in report_result.output

    def test_report_idempotent(self, tmp_path):
        fixture = tmp_path / "replies.yaml"
        write_script_fixture(fixture, DESK_MANIFEST)
        out_dir = tmp_path / "exp"
        CliRunner().invoke(
            main,
            ["bench", "run", "--manifest", str(DESK_MANIFEST), "--provider", "script",
             "--script", str(fixture), "--out", str(out_dir)],
        )
        first = (out_dir / "report.json").read_text()
        CliRunner().invoke(main, ["bench", "report", "--in", str(out_dir), "--at", "1,5,10,15,25"])
        CliRunner().invoke(main, ["bench", "report", "--in", str(out_dir), "--at", "1,5,10,15,25"])
        second = (out_dir / "report.json").read_text()
        third = (out_dir / "report.json").read_text()
        assert second == third
        assert json.loads(first)["total_runs"] == json.loads(second)["total_runs"]

    def test_usage_error_exit_code(self):
        result = CliRunner().invoke(main, ["bench", "run", "--out", "x"])
        assert result.exit_code == 2

    def test_parallel_workers_keep_log_order_and_bytes(self, tmp_path):
        from cfnloop.bench.experiment import run_experiment
        from cfnloop.config import load_config

        fixture = tmp_path / "replies.yaml"
        write_script_fixture(fixture, DESK_MANIFEST)
        logs = []
        for name in ("w1", "w2"):
            config = load_config(
                None,
                {
                    "manifest": str(DESK_MANIFEST),
                    "script": str(fixture),
                    "out_dir": str(tmp_path / name),
                    "workers": 3,
                },
            )
            run_experiment(config, provider_kind="script")
            logs.append((tmp_path / name / "runs.jsonl").read_bytes())
        assert logs[0] == logs[1]

    def test_human_serve_starts_session_api(self, tmp_path):
        # one task needs human feedback; a thread plays the operator over HTTP
        import threading
        import time

        import requests

        fixture = tmp_path / "replies.yaml"
        manifest = tmp_path / "manifest.yaml"
        (tmp_path / "ref.yaml").write_text("Resources:\n  B:\n    Type: AWS::S3::Bucket\n")
        manifest.write_text("- id: t-human\n  prompt: a bucket\n  reference: ref.yaml\n")
        fixture.write_text(
            yaml.safe_dump({"t-human": [fenced(BAD_SYNTAX)] * 7 + [fenced("Resources:\n  B:\n    Type: AWS::S3::Bucket\n")]})
        )

        def operator():
            base = "http://127.0.0.1:18731"
            for _ in range(400):
                try:
                    pending = requests.get(f"{base}/sessions", timeout=2).json()
                except requests.RequestException:
                    pending = []
                if pending:
                    requests.post(
                        f"{base}/sessions/{pending[0]['id']}/feedback",
                        json={"text": "fix the property name"},
                        timeout=2,
                    )
                    return
                time.sleep(0.05)

        thread = threading.Thread(target=operator, daemon=True)
        thread.start()
        result = CliRunner().invoke(
            main,
            ["bench", "run", "--manifest", str(manifest), "--provider", "script",
             "--script", str(fixture), "--human", "serve", "--serve-port", "18731",
             "--out", str(tmp_path / "exp")],
        )
        thread.join(timeout=10)
        assert result.exit_code == 0, result.output
        assert "1/1 tasks deployed" in result.output
