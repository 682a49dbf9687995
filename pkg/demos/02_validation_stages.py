"""Run the format and syntax stages over deliberately broken templates."""

from cfnloop import parse_template
from cfnloop.validators import check_format, check_syntax, load_resource_spec

PADDED_BRACKETS = """\
Resources:
  Subnet:
    Type: AWS::EC2::Subnet
    Properties:
      VpcId: vpc-123
      AvailabilityZone: !Select [ 0, !GetAZs '' ]
"""

TYPO_PROPERTY = """\
Resources:
  Bucket:
    Type: AWS::S3::Bucket
    Properties:
      BucketNam: my-bucket
"""

POINTLESS_SUB = """\
Resources:
  Box:
    Type: AWS::EC2::Instance
    Properties:
      UserData: !Sub |
        #!/bin/bash
        echo "nothing to substitute here"
"""

print("stage 1, format: padded flow-sequence brackets")
for violation in check_format(PADDED_BRACKETS).violations:
    print(f"  [{violation.rule_id}] {violation.message}")

spec = load_resource_spec()
print(f"\nstage 2, syntax (resource spec covers {len(spec)} types)")

print("\n  a hallucinated property:")
for violation in check_syntax(parse_template(TYPO_PROPERTY), spec).violations:
    print(f"  [{violation.rule_id}] {violation.path}: {violation.message}")

print("\n  a Sub with no variables:")
for violation in check_syntax(parse_template(POINTLESS_SUB), spec).violations:
    print(f"  [{violation.rule_id}] {violation.path}: {violation.message}")
