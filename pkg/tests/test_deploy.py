import random

import pytest

from cfnloop.deploy import (
    EnvConfig,
    ResolutionContext,
    StackStatus,
    delete_stack,
    deploy,
    evaluate_intrinsic,
    new_environment,
    resolve_tree,
)
from cfnloop.deploy.engine import DeploymentFailure
from cfnloop.errors import ConfigError, EvalError, UnknownStack
from cfnloop.template import Intrinsic, parse_template

from conftest import SNS_TEMPLATE, SNS_TEMPLATE_WITH_DEFAULT


class TestEnvironment:
    def test_default_fixture(self):
        env = new_environment()
        assert env.region == "us-east-1"
        assert env.az_list == ["us-east-1a", "us-east-1b", "us-east-1c"]
        assert "sim-keypair" in env.registries["key_pairs"]
        assert env.registries["global_bucket_names"] == set()
        assert env.stacks == {}
        assert env.is_clean()

    def test_config_adds_key_pair(self):
        env = new_environment(EnvConfig.from_dict({"registries": {"key_pairs": ["prod-key"]}}))
        assert "prod-key" in env.registries["key_pairs"]
        assert "sim-keypair" in env.registries["key_pairs"]

    def test_empty_az_list_rejected(self):
        with pytest.raises(ConfigError):
            new_environment(EnvConfig(az_list=[]))

    def test_config_from_yaml(self, tmp_path):
        path = tmp_path / "env.yaml"
        path.write_text("region: eu-west-1\naz_list: [eu-west-1a, eu-west-1b]\nregistries:\n  existing_vpcs: [vpc-123]\n")
        env = new_environment(EnvConfig.from_yaml(path))
        assert env.region == "eu-west-1"
        assert "vpc-123" in env.registries["existing_vpcs"]


class TestParameterResolution:
    def test_missing_value_message_is_exact(self):
        result = deploy(new_environment(), parse_template(SNS_TEMPLATE))
        assert isinstance(result, DeploymentFailure)
        assert result.phase == "parameter-validation"
        assert result.message == (
            "An error occurred (ValidationError) when calling the CreateStack operation: "
            "Parameters: [NotificationEmail] must have values"
        )

    def test_keyname_missing_value(self):
        text = "Parameters:\n  KeyName:\n    Type: AWS::EC2::KeyPair::KeyName\nResources:\n  T:\n    Type: AWS::SNS::Topic\n"
        result = deploy(new_environment(), parse_template(text))
        assert result.message.endswith("Parameters: [KeyName] must have values")

    def test_bad_parameter_value_message_is_exact(self):
        text = "Parameters:\n  KeyName:\n    Type: AWS::EC2::KeyPair::KeyName\nResources:\n  T:\n    Type: AWS::SNS::Topic\n"
        result = deploy(new_environment(), parse_template(text), {"KeyName": "nonexistent-key"})
        assert isinstance(result, DeploymentFailure)
        assert result.message == (
            "Parameter validation failed: parameter value nonexistent-key "
            "for parameter name KeyName does not exist"
        )

    def test_valid_key_pair_accepted(self):
        text = "Parameters:\n  KeyName:\n    Type: AWS::EC2::KeyPair::KeyName\nResources:\n  T:\n    Type: AWS::SNS::Topic\n"
        result = deploy(new_environment(), parse_template(text), {"KeyName": "sim-keypair"})
        assert result.status == StackStatus.CREATE_COMPLETE

    def test_allowed_values_enforced(self):
        text = (
            "Parameters:\n"
            "  Mode:\n"
            "    Type: String\n"
            "    Default: standard\n"
            "    AllowedValues: [standard, bulk]\n"
            "Resources:\n"
            "  T:\n"
            "    Type: AWS::SNS::Topic\n"
        )
        ok = deploy(new_environment(), parse_template(text))
        assert ok.status == StackStatus.CREATE_COMPLETE
        bad = deploy(new_environment(), parse_template(text), {"Mode": "turbo"})
        assert isinstance(bad, DeploymentFailure)
        assert bad.phase == "parameter-validation"

    def test_scalar_allowed_values_tolerated(self):
        text = (
            "Parameters:\n"
            "  Mode:\n"
            "    Type: String\n"
            "    Default: standard\n"
            "    AllowedValues: standard\n"  # malformed: should be a list
            "Resources:\n"
            "  T:\n"
            "    Type: AWS::SNS::Topic\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert result.status == StackStatus.CREATE_COMPLETE

    def test_ssm_parameter_type_resolves(self):
        text = (
            "Parameters:\n"
            "  Ami:\n"
            "    Type: AWS::SSM::Parameter::Value<AWS::EC2::Image::Id>\n"
            "    Default: /aws/service/ami-amazon-linux-latest/al2023-ami-kernel-default-x86_64\n"
            "Resources:\n"
            "  I:\n"
            "    Type: AWS::EC2::Instance\n"
            "    Properties:\n"
            "      ImageId: !Ref Ami\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert result.status == StackStatus.CREATE_COMPLETE

    def test_unknown_ssm_path_is_bad_value(self):
        text = (
            "Parameters:\n"
            "  Ami:\n"
            "    Type: AWS::SSM::Parameter::Value<AWS::EC2::Image::Id>\n"
            "    Default: /not/a/real/path\n"
            "Resources:\n"
            "  T:\n"
            "    Type: AWS::SNS::Topic\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert "does not exist" in result.message


class TestDeploy:
    def test_sns_stack_deploys_in_order(self):
        env = new_environment()
        result = deploy(env, parse_template(SNS_TEMPLATE), {"NotificationEmail": "ops@example.com"})
        assert result.status == StackStatus.CREATE_COMPLETE
        logical_order = [logical for logical, _ in result.provisioned]
        assert logical_order == ["NotificationTopic", "EmailSubscription"]

    def test_physical_ids_deterministic(self):
        results = []
        for _ in range(2):
            env = new_environment()
            r = deploy(env, parse_template(SNS_TEMPLATE_WITH_DEFAULT))
            results.append(r.provisioned)
        assert results[0] == results[1]
        assert results[0][0][1] == "stack-1-NotificationTopic-0"

    def test_bucket_name_collision_rolls_back(self):
        text = (
            "Resources:\n"
            "  T:\n"
            "    Type: AWS::SNS::Topic\n"
            "  B:\n"
            "    Type: AWS::S3::Bucket\n"
            "    Properties:\n"
            "      BucketName: shared-name\n"
        )
        env = new_environment()
        first = deploy(env, parse_template(text))
        assert first.status == StackStatus.CREATE_COMPLETE
        second = deploy(env, parse_template(text))
        assert isinstance(second, DeploymentFailure)
        assert second.phase == "provision"
        assert second.failing_resource == "B"
        assert "already exists" in second.message
        # rollback left only the first stack's registrations
        assert env.registries["global_bucket_names"] == {"shared-name"}
        rolled_back = [s for s in env.stacks.values() if s.status == StackStatus.ROLLBACK_COMPLETE]
        assert len(rolled_back) == 1 and rolled_back[0].provisioned == []

    def test_security_group_needs_vpc(self):
        text = (
            "Resources:\n"
            "  SG:\n"
            "    Type: AWS::EC2::SecurityGroup\n"
            "    Properties:\n"
            "      GroupDescription: no vpc anywhere\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert result.failing_resource == "SG"

    def test_security_group_accepts_registry_vpc(self):
        text = (
            "Resources:\n"
            "  SG:\n"
            "    Type: AWS::EC2::SecurityGroup\n"
            "    Properties:\n"
            "      GroupDescription: uses a pre-existing vpc\n"
            "      VpcId: vpc-preexisting\n"
        )
        env = new_environment(EnvConfig.from_dict({"registries": {"existing_vpcs": ["vpc-preexisting"]}}))
        result = deploy(env, parse_template(text))
        assert result.status == StackStatus.CREATE_COMPLETE

    def test_rds_read_replica_subnet_group_conflict(self):
        text = (
            "Resources:\n"
            "  Replica:\n"
            "    Type: AWS::RDS::DBInstance\n"
            "    Properties:\n"
            "      Engine: postgres\n"
            "      SourceDBInstanceIdentifier: source-db\n"
            "      DBSubnetGroupName: some-group\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert result.message == (
            "DbSubnetGroupName should not be specified for read replicas "
            "created in the same region as the master."
        )

    def test_unknown_ami_fails_provision(self):
        text = (
            "Resources:\n"
            "  I:\n"
            "    Type: AWS::EC2::Instance\n"
            "    Properties:\n"
            "      ImageId: ami-00000000000000bad\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert "does not exist" in result.message

    def test_false_condition_skips_resource(self):
        text = (
            "Parameters:\n"
            "  Env:\n"
            "    Type: String\n"
            "    Default: dev\n"
            "Conditions:\n"
            "  IsProd: !Equals [!Ref Env, prod]\n"
            "Resources:\n"
            "  Always:\n"
            "    Type: AWS::SNS::Topic\n"
            "  ProdOnly:\n"
            "    Type: AWS::SNS::Topic\n"
            "    Condition: IsProd\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert [logical for logical, _ in result.provisioned] == ["Always"]

    def test_cycle_fails_at_graph_phase(self):
        text = (
            "Resources:\n"
            "  A:\n"
            "    Type: AWS::SNS::Topic\n"
            "    DependsOn: B\n"
            "  B:\n"
            "    Type: AWS::SNS::Topic\n"
            "    DependsOn: A\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert result.phase == "graph"

    def test_malformed_join_is_failure_not_crash(self):
        text = (
            "Resources:\n"
            "  T:\n"
            "    Type: AWS::SNS::Topic\n"
            "    Properties:\n"
            "      DisplayName: !Join [just-one-element]\n"
        )
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert result.phase == "provision"

    def test_non_mapping_properties_is_failure_not_crash(self):
        text = "Resources:\n  B:\n    Type: AWS::S3::Bucket\n    Properties: oops\n"
        result = deploy(new_environment(), parse_template(text))
        assert isinstance(result, DeploymentFailure)
        assert "must be an object" in result.message

    def test_stage_separation_failure_phases(self):
        # every deploy failure is parameter-validation, graph, or provision
        failures = [
            deploy(new_environment(), parse_template(SNS_TEMPLATE)),
            deploy(
                new_environment(),
                parse_template("Resources:\n  SG:\n    Type: AWS::EC2::SecurityGroup\n    Properties:\n      GroupDescription: x\n"),
            ),
        ]
        for failure in failures:
            assert failure.phase in ("parameter-validation", "graph", "provision")


class TestDeleteStack:
    def test_delete_restores_snapshot(self):
        env = new_environment()
        result = deploy(env, parse_template(SNS_TEMPLATE_WITH_DEFAULT))
        assert not env.is_clean()
        delete_stack(env, result.stack_id)
        assert env.is_clean()
        assert env.state() == env.initial_snapshot

    def test_delete_twice_raises(self):
        env = new_environment()
        result = deploy(env, parse_template(SNS_TEMPLATE_WITH_DEFAULT))
        delete_stack(env, result.stack_id)
        with pytest.raises(UnknownStack):
            delete_stack(env, result.stack_id)

    def test_delete_unknown_raises(self):
        with pytest.raises(UnknownStack):
            delete_stack(new_environment(), "nope")

    def test_randomized_create_delete_sequence_restores_snapshot(self):
        rng = random.Random(20240817)
        bucket_template = (
            "Resources:\n"
            "  B:\n"
            "    Type: AWS::S3::Bucket\n"
            "    Properties:\n"
            "      BucketName: '{name}'\n"
        )
        env = new_environment()
        live = []
        for i in range(20):
            if live and rng.random() < 0.4:
                delete_stack(env, live.pop(rng.randrange(len(live))))
            else:
                name = f"bucket-{rng.randrange(3)}"  # collisions on purpose
                result = deploy(env, parse_template(bucket_template.format(name=name)))
                if not isinstance(result, DeploymentFailure):
                    live.append(result.stack_id)
        for stack_id in live:
            delete_stack(env, stack_id)
        assert env.state() == env.initial_snapshot


class TestIntrinsics:
    def ctx(self, **kwargs):
        defaults = dict(region="us-east-1", az_list=["us-east-1a", "us-east-1b", "us-east-1c"], stack_name="stack-1")
        defaults.update(kwargs)
        return ResolutionContext(**defaults)

    def test_select_getazs(self):
        node = Intrinsic("Fn::Select", [0, Intrinsic("Fn::GetAZs", "")])
        assert evaluate_intrinsic(self.ctx(), node) == "us-east-1a"

    def test_sub_pseudo(self):
        node = Intrinsic("Fn::Sub", "${AWS::Region}-app")
        assert evaluate_intrinsic(self.ctx(), node) == "us-east-1-app"

    def test_sub_escaped_literal(self):
        node = Intrinsic("Fn::Sub", "${!KeepMe}-x")
        assert evaluate_intrinsic(self.ctx(), node) == "${KeepMe}-x"

    def test_sub_list_form_with_map(self):
        node = Intrinsic("Fn::Sub", ["${a}-${b}", {"a": "1", "b": "2"}])
        assert evaluate_intrinsic(self.ctx(), node) == "1-2"

    def test_join(self):
        node = Intrinsic("Fn::Join", ["-", ["a", "b", "c"]])
        assert evaluate_intrinsic(self.ctx(), node) == "a-b-c"

    def test_split_then_select(self):
        node = Intrinsic("Fn::Select", [1, Intrinsic("Fn::Split", [",", "x,y,z"])])
        assert evaluate_intrinsic(self.ctx(), node) == "y"

    def test_select_out_of_range(self):
        node = Intrinsic("Fn::Select", [9, ["only", "two"]])
        with pytest.raises(EvalError) as excinfo:
            evaluate_intrinsic(self.ctx(), node)
        assert excinfo.value.kind == "index-out-of-range"

    def test_findinmap_two_by_two(self):
        mappings = {
            "RegionMap": {
                "us-east-1": {"ami": "ami-east", "zone": "a"},
                "eu-west-1": {"ami": "ami-west", "zone": "b"},
            }
        }
        ctx = self.ctx(mappings=mappings)
        # hand-expanded: RegionMap[us-east-1][ami] = ami-east, [eu-west-1][zone] = b
        assert evaluate_intrinsic(ctx, Intrinsic("Fn::FindInMap", ["RegionMap", "us-east-1", "ami"])) == "ami-east"
        assert evaluate_intrinsic(ctx, Intrinsic("Fn::FindInMap", ["RegionMap", "eu-west-1", "zone"])) == "b"
        with pytest.raises(EvalError) as excinfo:
            evaluate_intrinsic(ctx, Intrinsic("Fn::FindInMap", ["RegionMap", "us-east-1", "missing"]))
        assert excinfo.value.kind == "missing-mapping-key"

    def test_ref_unknown_target(self):
        with pytest.raises(EvalError) as excinfo:
            evaluate_intrinsic(self.ctx(), Intrinsic("Ref", "Ghost"))
        assert excinfo.value.kind == "unknown-target"

    def test_import_value_unsupported(self):
        with pytest.raises(EvalError) as excinfo:
            evaluate_intrinsic(self.ctx(), Intrinsic("Fn::ImportValue", "other-stack-output"))
        assert excinfo.value.kind == "unsupported-cross-stack"

    def test_getatt_arn_synthesis(self):
        ctx = self.ctx(physical_ids={"T": "stack-1-T-0"}, resource_types={"T": "AWS::SNS::Topic"})
        value = evaluate_intrinsic(ctx, Intrinsic("Fn::GetAtt", ["T", "TopicArn"]))
        assert value == "arn:aws:sns:us-east-1:123456789012:stack-1-T-0"

    def test_no_value_pruned_from_tree(self):
        ctx = self.ctx()
        tree = {"Keep": "x", "Drop": Intrinsic("Ref", "AWS::NoValue")}
        assert resolve_tree(ctx, tree) == {"Keep": "x"}

    def test_if_with_conditions(self):
        ctx = self.ctx(
            parameters={"Env": "prod"},
            conditions={"IsProd": Intrinsic("Fn::Equals", [Intrinsic("Ref", "Env"), "prod"])},
        )
        node = Intrinsic("Fn::If", ["IsProd", "big", "small"])
        assert evaluate_intrinsic(ctx, node) == "big"

    def test_base64(self):
        assert evaluate_intrinsic(self.ctx(), Intrinsic("Fn::Base64", "hi")) == "aGk="
