"""Deploy stacks into the simulated account: success, rollback, and cleanup."""

from cfnloop import parse_template
from cfnloop.deploy import delete_stack, deploy, new_environment
from cfnloop.deploy.engine import DeploymentFailure

SNS_STACK = """\
Parameters:
  NotificationEmail:
    Type: String
Resources:
  Topic:
    Type: AWS::SNS::Topic
  Subscription:
    Type: AWS::SNS::Subscription
    Properties:
      TopicArn: !Ref Topic
      Protocol: email
      Endpoint: !Ref NotificationEmail
"""

BUCKET_STACK = """\
Resources:
  Data:
    Type: AWS::S3::Bucket
    Properties:
      BucketName: demo-shared-bucket
  Topic:
    Type: AWS::SNS::Topic
"""

env = new_environment()
print(f"fresh account: region={env.region} azs={env.az_list}")

# Missing parameter values surface exactly like the cloud API reports them.
failure = deploy(env, parse_template(SNS_STACK))
print(f"\nwithout a value: {failure.message}")

stack = deploy(env, parse_template(SNS_STACK), {"NotificationEmail": "ops@example.com"})
print(f"\nwith a value: {stack.status.value}")
for logical, physical in stack.provisioned:
    print(f"  {logical} -> {physical}")

# Global bucket names are unique; the second stack rolls back automatically.
first = deploy(env, parse_template(BUCKET_STACK))
second = deploy(env, parse_template(BUCKET_STACK))
assert isinstance(second, DeploymentFailure)
print(f"\nname collision: {second.message}")
rolled_back = [s for s in env.stacks.values() if s.status.value == "ROLLBACK_COMPLETE"]
print(f"rolled-back stack retains {sum(len(s.provisioned) for s in rolled_back)} resources after teardown")

delete_stack(env, stack.stack_id)
delete_stack(env, first.stack_id)
print(f"\nafter deleting every stack, environment matches its initial snapshot: {env.is_clean()}")
