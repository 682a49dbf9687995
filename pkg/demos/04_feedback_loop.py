"""Drive the full generate -> validate -> feed-back loop with a scripted model.

The scripted provider replays three replies: a tab-broken document, a
template with a hallucinated property, and finally a deployable stack.
Watch the feedback escalate and the loop converge.
"""

from cfnloop.deploy import new_environment
from cfnloop.llm import ScriptedProvider
from cfnloop.orchestrator import RunOptions, TaskInput, run_task

REPLIES = [
    "Here you go:\n\n```yaml\nResources:\n\tBroken:\n```\n",
    (
        "Apologies, corrected:\n\n```yaml\n"
        "Resources:\n"
        "  AlertTopic:\n"
        "    Type: AWS::SNS::Topic\n"
        "    Properties:\n"
        "      TopicDisplayName: alerts\n"
        "```\n"
    ),
    (
        "Fixed the property name:\n\n```yaml\n"
        "Resources:\n"
        "  AlertTopic:\n"
        "    Type: AWS::SNS::Topic\n"
        "    Properties:\n"
        "      DisplayName: alerts\n"
        "```\n"
    ),
]

task = TaskInput(
    task_id="demo-loop",
    prompt="We need a CloudFormation template that creates an SNS topic for alerts.",
)
record = run_task(task, ScriptedProvider(REPLIES), new_environment, options=RunOptions())

print(f"task {record.task_id}: {record.final_status} after {len(record.iterations)} iterations\n")
for iteration in record.iterations:
    print(f"iteration {iteration.index}: reached {iteration.stage_reached}")
    for message in iteration.violations_summary:
        print(f"    {message}")
    if iteration.feedback_text:
        first_line = iteration.feedback_text.splitlines()[0]
        print(f"    feedback ({iteration.feedback_tier_used}): {first_line}")
print(f"\ndeployed at iteration {record.success_iteration}")
