"""The simulated cloud account: region fixture, registries, live stacks.

Every benchmark run gets its own environment instance so nothing leaks
between tasks. The environment records a snapshot at construction;
deploy/delete cycles must restore state to that snapshot exactly.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

from ..errors import ConfigError

DEFAULT_REGION = "us-east-1"
DEFAULT_AZS = ["us-east-1a", "us-east-1b", "us-east-1c"]
DEFAULT_KEY_PAIRS = ["sim-keypair"]
DEFAULT_AMI_CATALOG = [
    "ami-0c55b159cbfafe1f0",
    "ami-0ff8a91507f77f867",
    "ami-0de53d8956e8dcf80",
]
DEFAULT_SSM_PARAMETERS = {
    "/aws/service/ami-amazon-linux-latest/al2023-ami-kernel-default-x86_64": "ami-0c55b159cbfafe1f0",
    "/aws/service/ami-amazon-linux-latest/amzn2-ami-hvm-x86_64-gp2": "ami-0ff8a91507f77f867",
}


class StackStatus(str, Enum):
    CREATE_IN_PROGRESS = "CREATE_IN_PROGRESS"
    CREATE_COMPLETE = "CREATE_COMPLETE"
    ROLLBACK_COMPLETE = "ROLLBACK_COMPLETE"
    DELETE_COMPLETE = "DELETE_COMPLETE"


@dataclass
class StackState:
    stack_id: str
    status: StackStatus = StackStatus.CREATE_IN_PROGRESS
    provisioned: list[tuple[str, str]] = field(default_factory=list)
    resolved_parameters: dict = field(default_factory=dict)
    # registry side effects to undo at rollback/delete, in apply order
    undo_log: list[tuple] = field(default_factory=list)


@dataclass
class EnvConfig:
    region: str = DEFAULT_REGION
    az_list: list[str] = field(default_factory=lambda: list(DEFAULT_AZS))
    key_pairs: list[str] = field(default_factory=lambda: list(DEFAULT_KEY_PAIRS))
    ami_catalog: list[str] = field(default_factory=lambda: list(DEFAULT_AMI_CATALOG))
    global_bucket_names: list[str] = field(default_factory=list)
    existing_vpcs: list[str] = field(default_factory=list)
    existing_subnets: list[str] = field(default_factory=list)
    ssm_parameters: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SSM_PARAMETERS))

    @classmethod
    def from_dict(cls, raw: dict) -> "EnvConfig":
        if not isinstance(raw, dict):
            raise ConfigError("environment config must be a mapping")
        cfg = cls()
        if "region" in raw:
            cfg.region = str(raw["region"])
        if "az_list" in raw:
            cfg.az_list = [str(a) for a in raw["az_list"] or []]
        registries = raw.get("registries", {})
        for key in (
            "key_pairs",
            "ami_catalog",
            "global_bucket_names",
            "existing_vpcs",
            "existing_subnets",
        ):
            if key in registries:
                base = list(getattr(cls(), key))
                extra = [str(v) for v in registries[key] or []]
                setattr(cfg, key, sorted(set(base + extra)) if key in ("key_pairs", "ami_catalog") else extra)
        if "ssm_parameters" in registries:
            cfg.ssm_parameters.update({str(k): str(v) for k, v in (registries["ssm_parameters"] or {}).items()})
        return cfg

    @classmethod
    def from_yaml(cls, path: str | Path) -> "EnvConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"environment config not found: {path}")
        raw = yaml.safe_load(path.read_text()) or {}
        return cls.from_dict(raw)

    def validate(self) -> None:
        problems = []
        if not self.region:
            problems.append("region must be non-empty")
        if not self.az_list:
            problems.append("az_list must contain at least one availability zone (GetAZs would be undefined)")
        if problems:
            raise ConfigError(problems)


class SimEnvironment:
    """One isolated simulated account. Single-writer: one deploy/delete at a time."""

    def __init__(self, config: EnvConfig | None = None):
        config = config or EnvConfig()
        config.validate()
        self.region = config.region
        self.az_list = list(config.az_list)
        self.registries: dict = {
            "key_pairs": set(config.key_pairs),
            "ami_catalog": set(config.ami_catalog),
            "global_bucket_names": set(config.global_bucket_names),
            "existing_vpcs": set(config.existing_vpcs),
            "existing_subnets": set(config.existing_subnets),
            "ssm_parameters": dict(config.ssm_parameters),
        }
        self.stacks: dict[str, StackState] = {}
        self._stack_counter = 0
        self.initial_snapshot = self.state()

    def state(self) -> dict:
        """Deep copy of everything that must return to its initial value.

        Rolled-back and deleted stacks hold no resources, so only stacks
        still holding resources count as part of the observable state.
        """
        live = {
            sid: list(stack.provisioned)
            for sid, stack in self.stacks.items()
            if stack.status in (StackStatus.CREATE_IN_PROGRESS, StackStatus.CREATE_COMPLETE)
        }
        return copy.deepcopy(
            {
                "region": self.region,
                "az_list": self.az_list,
                "registries": self.registries,
                "live_stacks": live,
            }
        )

    def is_clean(self) -> bool:
        return self.state() == self.initial_snapshot

    def allocate_stack_id(self, name: str | None = None) -> str:
        self._stack_counter += 1
        return name or f"stack-{self._stack_counter}"


def new_environment(config: EnvConfig | None = None) -> SimEnvironment:
    """Build a fresh simulated account from a config (default fixture when None)."""
    return SimEnvironment(config)
