from .intent import IntentResult, IntentSpec, eval_intent, intent_coverage
from .policy import PolicyRule, PolicyScan, compliance_rates, load_policies, scan_security

__all__ = [
    "IntentResult",
    "IntentSpec",
    "PolicyRule",
    "PolicyScan",
    "compliance_rates",
    "eval_intent",
    "intent_coverage",
    "load_policies",
    "scan_security",
]
