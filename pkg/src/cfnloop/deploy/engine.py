"""Stack creation and deletion against the simulated environment.

deploy() runs the CloudFormation create pipeline: parameter resolution,
dependency ordering, per-resource provisioning with intrinsic evaluation,
and automatic reverse-order rollback on any provision failure. Failures
come back as DeploymentFailure values, never exceptions, so the
orchestrator can feed them straight into the feedback loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..errors import CycleError, EvalError, UnknownStack
from ..graph import dependency_graph
from ..template import Template
from ..validators.resource_spec import ResourceSpec, load_resource_spec
from .environment import SimEnvironment, StackState, StackStatus
from .intrinsics import ResolutionContext, evaluate_condition, resolve_tree

PHASE_PARAMETER = "parameter-validation"
PHASE_GRAPH = "graph"
PHASE_PROVISION = "provision"

_default_spec_cache: ResourceSpec | None = None


def _default_spec() -> ResourceSpec:
    global _default_spec_cache
    if _default_spec_cache is None:
        _default_spec_cache = load_resource_spec()
    return _default_spec_cache


@dataclass
class DeploymentFailure:
    phase: str  # parameter-validation | graph | provision
    message: str
    failing_resource: str | None = None


def missing_values_message(names: list[str]) -> str:
    joined = ", ".join(names)
    return (
        "An error occurred (ValidationError) when calling the CreateStack operation: "
        f"Parameters: [{joined}] must have values"
    )

def bad_parameter_value_message(value: Any, name: str) -> str:
    return f"Parameter validation failed: parameter value {value} for parameter name {name} does not exist"


def allowed_values_message(name: str, value: Any) -> str:
    return (
        "An error occurred (ValidationError) when calling the CreateStack operation: "
        f"Parameter '{name}' must be one of AllowedValues; got '{value}'"
    )


class ProvisionFailure(Exception):
    pass


# --- registry bookkeeping ---------------------------------------------------


def _apply_set_add(env: SimEnvironment, stack: StackState, registry: str, value: str) -> None:
    env.registries[registry].add(value)
    stack.undo_log.append(("set", registry, value))


def _apply_map_set(env: SimEnvironment, stack: StackState, registry: str, key: str, value: str) -> None:
    prior = env.registries[registry].get(key, _MISSING)
    env.registries[registry][key] = value
    stack.undo_log.append(("map", registry, key, prior))


_MISSING = object()


def _undo_all(env: SimEnvironment, stack: StackState) -> None:
    for entry in reversed(stack.undo_log):
        if entry[0] == "set":
            _, registry, value = entry
            env.registries[registry].discard(value)
        else:
            _, registry, key, prior = entry
            if prior is _MISSING:
                env.registries[registry].pop(key, None)
            else:
                env.registries[registry][key] = prior
    stack.undo_log.clear()


# --- per-type provisioners ---------------------------------------------------


@dataclass
class _Job:
    env: SimEnvironment
    stack: StackState
    logical_id: str
    resource_type: str
    properties: dict
    physical_id: str


def _check_az(job: _Job) -> None:
    az = job.properties.get("AvailabilityZone")
    if az and az not in job.env.az_list:
        raise ProvisionFailure(
            f"Availability zone '{az}' is not available in region {job.env.region}"
        )


def _provision_s3_bucket(job: _Job) -> str:
    name = job.properties.get("BucketName") or job.physical_id.lower()
    if name in job.env.registries["global_bucket_names"]:
        raise ProvisionFailure(f'Resource handler returned message: "{name} already exists"')
    _apply_set_add(job.env, job.stack, "global_bucket_names", name)
    return name


def _provision_vpc(job: _Job) -> str:
    _apply_set_add(job.env, job.stack, "existing_vpcs", job.physical_id)
    return job.physical_id


def _require_vpc(job: _Job) -> None:
    vpc_id = job.properties.get("VpcId")
    if vpc_id is None:
        raise ProvisionFailure("No default VPC for this user (VPCIdNotSpecified)")
    if vpc_id not in job.env.registries["existing_vpcs"]:
        raise ProvisionFailure(f"The vpc ID '{vpc_id}' does not exist (InvalidVpcID.NotFound)")


def _provision_security_group(job: _Job) -> str:
    _require_vpc(job)
    return job.physical_id


def _provision_subnet(job: _Job) -> str:
    _require_vpc(job)
    az = job.properties.get("AvailabilityZone")
    if az and az not in job.env.az_list:
        raise ProvisionFailure(f"Availability zone '{az}' is not available in region {job.env.region}")
    _apply_set_add(job.env, job.stack, "existing_subnets", job.physical_id)
    return job.physical_id


def _check_image_and_key(job: _Job) -> None:
    image = job.properties.get("ImageId")
    if image and image not in job.env.registries["ami_catalog"]:
        raise ProvisionFailure(f"The image id '[{image}]' does not exist (InvalidAMIID.NotFound)")
    key = job.properties.get("KeyName")
    if key and key not in job.env.registries["key_pairs"]:
        raise ProvisionFailure(f"The key pair '{key}' does not exist (InvalidKeyPair.NotFound)")


def _provision_instance(job: _Job) -> str:
    _check_image_and_key(job)
    _check_az(job)
    subnet = job.properties.get("SubnetId")
    if subnet and subnet not in job.env.registries["existing_subnets"]:
        raise ProvisionFailure(f"The subnet ID '{subnet}' does not exist (InvalidSubnetID.NotFound)")
    return job.physical_id


def _provision_launch_configuration(job: _Job) -> str:
    _check_image_and_key(job)
    return job.physical_id


def _provision_rds_instance(job: _Job) -> str:
    if job.properties.get("SourceDBInstanceIdentifier") and job.properties.get("DBSubnetGroupName"):
        raise ProvisionFailure(
            "DbSubnetGroupName should not be specified for read replicas created in the same region as the master."
        )
    return job.physical_id


def _provision_key_pair(job: _Job) -> str:
    name = job.properties.get("KeyName") or job.physical_id
    if name in job.env.registries["key_pairs"]:
        raise ProvisionFailure(f"The keypair '{name}' already exists")
    _apply_set_add(job.env, job.stack, "key_pairs", name)
    return name


def _provision_ssm_parameter(job: _Job) -> str:
    name = job.properties.get("Name") or job.physical_id
    if name in job.env.registries["ssm_parameters"]:
        raise ProvisionFailure(f"The parameter {name} already exists (ParameterAlreadyExists)")
    _apply_map_set(job.env, job.stack, "ssm_parameters", name, str(job.properties.get("Value", "")))
    return name


def _provision_volume(job: _Job) -> str:
    _check_az(job)
    return job.physical_id


_PROVISIONERS: dict[str, Callable[[_Job], str]] = {
    "AWS::S3::Bucket": _provision_s3_bucket,
    "AWS::EC2::VPC": _provision_vpc,
    "AWS::EC2::SecurityGroup": _provision_security_group,
    "AWS::EC2::Subnet": _provision_subnet,
    "AWS::EC2::Instance": _provision_instance,
    "AWS::EC2::KeyPair": _provision_key_pair,
    "AWS::EC2::Volume": _provision_volume,
    "AWS::AutoScaling::LaunchConfiguration": _provision_launch_configuration,
    "AWS::RDS::DBInstance": _provision_rds_instance,
    "AWS::SSM::Parameter": _provision_ssm_parameter,
}


# --- parameter resolution -----------------------------------------------------

_AWS_TYPE_REGISTRIES = {
    "AWS::EC2::KeyPair::KeyName": "key_pairs",
    "AWS::EC2::VPC::Id": "existing_vpcs",
    "AWS::EC2::Subnet::Id": "existing_subnets",
    "AWS::EC2::Image::Id": "ami_catalog",
}


def _validate_parameter_value(env: SimEnvironment, name: str, param_type: str, value: Any):
    """Returns (ok, resolved_value)."""
    if param_type.startswith("AWS::SSM::Parameter::Value"):
        store = env.registries["ssm_parameters"]
        if value not in store:
            return False, value
        return True, store[value]
    if param_type == "AWS::EC2::AvailabilityZone::Name":
        return value in env.az_list, value
    registry = _AWS_TYPE_REGISTRIES.get(param_type)
    if registry is not None:
        return value in env.registries[registry], value
    if param_type.startswith("List<") and param_type.endswith(">"):
        inner = param_type[5:-1]
        items = value.split(",") if isinstance(value, str) else list(value)
        for item in items:
            ok, _ = _validate_parameter_value(env, name, inner, item.strip() if isinstance(item, str) else item)
            if not ok:
                return False, value
        return True, value
    return True, value


def _resolve_parameters(
    env: SimEnvironment, template: Template, supplied: dict
) -> dict | DeploymentFailure:
    resolved: dict[str, Any] = {}
    missing: list[str] = []
    for name, param in template.parameters.items():
        if name in supplied:
            resolved[name] = supplied[name]
        elif param.default is not None:
            resolved[name] = param.default
        else:
            missing.append(name)
    if missing:
        return DeploymentFailure(PHASE_PARAMETER, missing_values_message(missing))

    for name, param in template.parameters.items():
        value = resolved[name]
        ok, value = _validate_parameter_value(env, name, param.param_type, value)
        if not ok:
            return DeploymentFailure(PHASE_PARAMETER, bad_parameter_value_message(resolved[name], name))
        resolved[name] = value
        allowed = param.allowed_values
        if isinstance(allowed, (list, tuple)) and value not in allowed:
            return DeploymentFailure(PHASE_PARAMETER, allowed_values_message(name, value))
    return resolved


# --- deploy / delete ----------------------------------------------------------


def deploy(
    env: SimEnvironment,
    template: Template,
    supplied_params: dict | None = None,
    stack_name: str | None = None,
    resource_spec: ResourceSpec | None = None,
) -> StackState | DeploymentFailure:
    """Create a stack from a template that already passed stages 1 and 2."""
    spec = resource_spec or _default_spec()
    resolved = _resolve_parameters(env, template, supplied_params or {})
    if isinstance(resolved, DeploymentFailure):
        return resolved

    try:
        order = dependency_graph(template).order
    except CycleError as exc:
        return DeploymentFailure(
            PHASE_GRAPH, f"Circular dependency between resources: [{', '.join(exc.nodes)}]"
        )

    stack = StackState(stack_id=env.allocate_stack_id(stack_name), resolved_parameters=dict(resolved))
    env.stacks[stack.stack_id] = stack
    ctx = ResolutionContext(
        region=env.region,
        az_list=env.az_list,
        stack_name=stack.stack_id,
        parameters=resolved,
        resource_types={lid: r.resource_type for lid, r in template.resources.items()},
        mappings=template.mappings,
        conditions=template.conditions,
    )

    def fail(message: str, logical: str) -> DeploymentFailure:
        _undo_all(env, stack)
        stack.provisioned.clear()
        stack.status = StackStatus.ROLLBACK_COMPLETE
        return DeploymentFailure(PHASE_PROVISION, message, failing_resource=logical)

    sequence = 0
    for logical in order:
        resource = template.resources[logical]
        if resource.condition:
            try:
                if not evaluate_condition(ctx, resource.condition):
                    continue
            except EvalError as exc:
                return fail(str(exc), logical)
        try:
            properties = resolve_tree(ctx, resource.properties)
        except EvalError as exc:
            return fail(str(exc), logical)
        if not isinstance(properties, dict):
            return fail(f"Properties of {logical} must be an object", logical)

        physical = f"{stack.stack_id}-{logical}-{sequence}"
        job = _Job(env, stack, logical, resource.resource_type, properties, physical)
        provisioner = _PROVISIONERS.get(resource.resource_type)
        try:
            if provisioner is not None:
                physical = provisioner(job)
            elif not spec.has_type(resource.resource_type):
                raise ProvisionFailure(
                    f"Unrecognized resource types: [{resource.resource_type}]"
                )
        except ProvisionFailure as exc:
            return fail(str(exc), logical)

        ctx.physical_ids[logical] = physical
        stack.provisioned.append((logical, physical))
        sequence += 1

    stack.status = StackStatus.CREATE_COMPLETE
    return stack


def delete_stack(env: SimEnvironment, stack_id: str) -> None:
    """Remove all stack resources in reverse provision order."""
    stack = env.stacks.get(stack_id)
    if stack is None or stack.status not in (
        StackStatus.CREATE_COMPLETE,
        StackStatus.ROLLBACK_COMPLETE,
    ):
        raise UnknownStack(f"no deletable stack with id '{stack_id}'")
    _undo_all(env, stack)
    stack.provisioned.clear()
    stack.status = StackStatus.DELETE_COMPLETE
    del env.stacks[stack_id]
