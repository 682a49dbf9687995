"""Parse a CloudFormation template, size it, and inspect its dependency graph."""

from pathlib import Path

from cfnloop import classify_difficulty, dependency_graph, measure, parse_template

text = Path(__file__).parent.parent.joinpath(
    "benchmarks/desk/templates/t05-dev-instance.yaml"
).read_text()

template = parse_template(text)
print(f"description: {template.description}")
print(f"parameters:  {', '.join(template.parameters)}")
print(f"resources:   {', '.join(template.resources)}")

# Short-form tags like !Ref and !Select come back as uniform intrinsic nodes.
subnet_az = template.resources["DevSubnet"].properties["AvailabilityZone"]
print(f"\nDevSubnet AvailabilityZone parses to: {subnet_az}")

metrics = measure(text)
print(f"\nmetrics: loc={metrics.loc} resources={metrics.resource_count} "
      f"parameters={metrics.parameter_count} token_estimate={metrics.token_estimate}")
print(f"difficulty level: {classify_difficulty(metrics)}")

graph = dependency_graph(template)
print("\nprovisioning order (dependencies first):")
for logical_id in graph.order:
    deps = graph.edges[logical_id]
    print(f"  {logical_id}" + (f"  <- needs {', '.join(deps)}" if deps else ""))
