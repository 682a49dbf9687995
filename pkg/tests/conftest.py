from pathlib import Path

import pytest

from cfnloop.validators.resource_spec import load_resource_spec

REPO_ROOT = Path(__file__).resolve().parent.parent
DESK_MANIFEST = REPO_ROOT / "benchmarks" / "desk" / "manifest.yaml"
DESK_TEMPLATES = REPO_ROOT / "benchmarks" / "desk" / "templates"
DESK_INTENTS = REPO_ROOT / "benchmarks" / "desk" / "intents"

# The two-resource notification template used throughout: one topic, one
# email subscription whose endpoint comes from a parameter with no default.
SNS_TEMPLATE = """\
AWSTemplateFormatVersion: '2010-09-09'
Description: SNS topic with an email subscription
Parameters:
  NotificationEmail:
    Type: String
    Description: Email address that receives notifications
Resources:
  NotificationTopic:
    Type: AWS::SNS::Topic
  EmailSubscription:
    Type: AWS::SNS::Subscription
    Properties:
      TopicArn: !Ref NotificationTopic
      Protocol: email
      Endpoint: !Ref NotificationEmail
"""

# Same stack, deployable with no overrides.
SNS_TEMPLATE_WITH_DEFAULT = SNS_TEMPLATE.replace(
    "    Type: String\n", "    Type: String\n    Default: ops@example.com\n"
)


@pytest.fixture(scope="session")
def resource_spec():
    return load_resource_spec()


@pytest.fixture()
def sns_text():
    return SNS_TEMPLATE


def fenced(template_text: str, lang: str = "yaml") -> str:
    """Wrap a template the way chat models reply with them."""
    return f"Here is the template you asked for:\n\n```{lang}\n{template_text}```\n"
