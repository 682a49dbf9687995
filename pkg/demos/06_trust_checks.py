"""Score templates for user-intent coverage and security compliance."""

from pathlib import Path

from cfnloop import parse_template
from cfnloop.trust import (
    IntentSpec,
    compliance_rates,
    eval_intent,
    intent_coverage,
    load_policies,
    scan_security,
)

ROOT = Path(__file__).parent.parent
DESK = ROOT / "benchmarks" / "desk"

# A generated template that forgot versioning: resource intent satisfied,
# attribute intent missed.
FORGETFUL_BUCKET = """\
Resources:
  ArtifactBucket:
    Type: AWS::S3::Bucket
    Properties:
      BucketEncryption:
        ServerSideEncryptionConfiguration:
          - ServerSideEncryptionByDefault:
              SSEAlgorithm: AES256
"""

spec = IntentSpec.from_yaml(DESK / "intents" / "t01-artifact-bucket.yaml")
reference = parse_template((DESK / "templates" / "t01-artifact-bucket.yaml").read_text())
generated = parse_template(FORGETFUL_BUCKET)

results = [eval_intent(reference, spec), eval_intent(generated, spec)]
for name, result in zip(["reference", "generated"], results):
    print(f"{name}: resource_ok={result.resource_ok} attribute_ok={result.attribute_ok} both={result.both_ok}")
print(f"coverage over both: {intent_coverage(results)}")

policies = load_policies()
print(f"\nscanning with {len(policies)} policies")
scans = []
for path in sorted((DESK / "templates").glob("*.yaml")):
    template = parse_template(path.read_text())
    scan = scan_security(template, policies, template_id=path.stem)
    scans.append(scan)
    applicable = scan.applicable_checks()
    failed = [c for c in applicable if not c.passed]
    marker = "compliant" if not failed else f"fails {', '.join(c.policy_id for c in failed)}"
    print(f"  {path.stem:28} {len(applicable) - len(failed)}/{len(applicable)} applicable checks  ({marker})")

rates = compliance_rates(scans)
print(
    f"\npolicy pass {rates['policy_pass_pct']:.1f}%  "
    f"unfiltered compliance {rates['unfiltered_pct']:.1f}%  "
    f"filtered compliance {rates['filtered_pct']:.1f}%"
)
