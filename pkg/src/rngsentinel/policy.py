"""Static policy evaluation over a declared randomness manifest.

A manifest is a call graph plus per-function RNG facts. The evaluator
first computes which functions transitively reach a core RNG primitive,
then applies the security rules to exactly that set: a differential
privacy context demands a cryptographic generator, clock and constant
seeds are rejected, and narrow seed ranges are scored against a 32-bit
entropy floor.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedManifest
from .generators import Algorithm, SecurityClass, classify
from .seeds import (
    BoundedRange,
    Constant,
    OsEntropy,
    SeedSource,
    SystemTime,
    UserProvided,
    seed_source_from_json,
)
from .transforms import DistributionSpec, spec_from_json

ENTROPY_FLOOR_BITS = 32.0


class Rule(str, Enum):
    INSECURE_SEED_SOURCE = "insecure_seed_source"
    LOW_SEED_ENTROPY = "low_seed_entropy"
    NON_CSPRNG_IN_DP_CONTEXT = "non_csprng_in_dp_context"
    UNEXPECTED_DISTRIBUTION = "unexpected_distribution"
    UNREACHABLE_GENERATOR_FACTS = "unreachable_generator_facts"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Directive(str, Enum):
    RESEED_FROM_OS_ENTROPY = "reseed_from_os_entropy"
    REPLACE_WITH_CSPRNG = "replace_with_csprng"


@dataclass(frozen=True)
class DpContext:
    """Differential-privacy labels; carried as metadata, never verified."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise MalformedManifest(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise MalformedManifest(f"delta must be in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class GeneratorFact:
    algorithm: Algorithm
    seed_source: SeedSource

    @property
    def security_class(self) -> SecurityClass:
        return classify(self.algorithm, self.seed_source)


@dataclass
class FunctionFact:
    id: str
    declared_distribution: DistributionSpec | None = None
    generator: GeneratorFact | None = None
    context: DpContext | None = None  # None means general context


@dataclass
class RandomnessManifest:
    functions: list[FunctionFact]
    edges: list[tuple[str, str]]
    core_rng_ids: set[str]

    def validate(self) -> None:
        ids = {f.id for f in self.functions}
        if len(ids) != len(self.functions):
            raise MalformedManifest("duplicate function ids")
        for caller, callee in self.edges:
            if caller not in ids or callee not in ids:
                raise MalformedManifest(f"dangling edge ({caller!r}, {callee!r})")
        if not self.core_rng_ids <= ids:
            missing = sorted(self.core_rng_ids - ids)
            raise MalformedManifest(f"core ids not declared as functions: {missing}")


@dataclass(frozen=True)
class PolicyViolation:
    rule: Rule
    function_id: str
    severity: Severity
    detail: str

    def to_json(self) -> dict:
        return {
            "function_id": self.function_id,
            "rule": self.rule.value,
            "severity": self.severity.value,
            "detail": self.detail,
        }


@dataclass
class PolicyRuleset:
    """Tunable expectations layered over the fixed security rules."""

    expected_distributions: dict[str, DistributionSpec] = field(default_factory=dict)
    entropy_floor_bits: float = ENTROPY_FLOOR_BITS


def transitive_rng_closure(manifest: RandomnessManifest) -> set[str]:
    """Ids from which some core RNG id is reachable along call edges,
    including the core ids themselves (reverse-reachability fixpoint)."""
    manifest.validate()
    callers: dict[str, list[str]] = {}
    for caller, callee in manifest.edges:
        callers.setdefault(callee, []).append(caller)
    seen = set(manifest.core_rng_ids)
    frontier = deque(seen)
    while frontier:
        node = frontier.popleft()
        for caller in callers.get(node, ()):
            if caller not in seen:
                seen.add(caller)
                frontier.append(caller)
    return seen


def evaluate_policies(
    manifest: RandomnessManifest, ruleset: PolicyRuleset | None = None
) -> list[PolicyViolation]:
    """Apply the security rules to every function in the RNG closure.

    Functions outside the closure that nevertheless declare generator or
    distribution facts are reported as unreachable-facts warnings instead;
    their declarations cannot be exercised by any core RNG path.
    """
    ruleset = ruleset or PolicyRuleset()
    closure = transitive_rng_closure(manifest)
    violations: list[PolicyViolation] = []

    for fn in manifest.functions:
        if fn.id not in closure:
            if fn.generator is not None or fn.declared_distribution is not None:
                violations.append(
                    PolicyViolation(
                        Rule.UNREACHABLE_GENERATOR_FACTS,
                        fn.id,
                        Severity.WARNING,
                        "declares RNG facts but cannot reach a core RNG function",
                    )
                )
            continue

        if fn.context is not None:
            sec = fn.generator.security_class if fn.generator else None
            if sec is not SecurityClass.CRYPTOGRAPHIC:
                have = sec.value if sec else "no generator declared"
                violations.append(
                    PolicyViolation(
                        Rule.NON_CSPRNG_IN_DP_CONTEXT,
                        fn.id,
                        Severity.ERROR,
                        f"differential privacy requires a cryptographic generator, have {have}",
                    )
                )

        if fn.generator is not None:
            src = fn.generator.seed_source
            if isinstance(src, (SystemTime, Constant)):
                violations.append(
                    PolicyViolation(
                        Rule.INSECURE_SEED_SOURCE,
                        fn.id,
                        Severity.ERROR,
                        f"{src.kind} is not a secure source of entropy",
                    )
                )
            elif isinstance(src, UserProvided):
                violations.append(
                    PolicyViolation(
                        Rule.INSECURE_SEED_SOURCE,
                        fn.id,
                        Severity.WARNING,
                        "user-provided seed shifts security responsibility to the user",
                    )
                )
            elif isinstance(src, BoundedRange):
                bits = math.log2(src.hi - src.lo)
                if bits < ruleset.entropy_floor_bits:
                    violations.append(
                        PolicyViolation(
                            Rule.LOW_SEED_ENTROPY,
                            fn.id,
                            Severity.WARNING,
                            f"seed range [{src.lo}, {src.hi}) carries {bits:.1f} bits,"
                            f" below the {ruleset.entropy_floor_bits:g}-bit floor",
                        )
                    )

        expected = ruleset.expected_distributions.get(fn.id)
        if expected is not None and fn.declared_distribution is not None:
            if fn.declared_distribution != expected:
                violations.append(
                    PolicyViolation(
                        Rule.UNEXPECTED_DISTRIBUTION,
                        fn.id,
                        Severity.WARNING,
                        f"declared {fn.declared_distribution.describe()},"
                        f" expected {expected.describe()}",
                    )
                )

    violations.sort(key=lambda v: (v.function_id, v.rule.value))
    return violations


def remediation_plan(
    violations: list[PolicyViolation],
) -> list[tuple[str, Directive]]:
    """Map violations to rebind directives for the runtime auditor."""
    plan: list[tuple[str, Directive]] = []
    seen: set[tuple[str, Directive]] = set()
    for v in sorted(violations, key=lambda v: (v.function_id, v.rule.value)):
        if v.rule is Rule.NON_CSPRNG_IN_DP_CONTEXT:
            directive = Directive.REPLACE_WITH_CSPRNG
        elif v.rule in (Rule.INSECURE_SEED_SOURCE, Rule.LOW_SEED_ENTROPY):
            directive = Directive.RESEED_FROM_OS_ENTROPY
        else:
            continue
        key = (v.function_id, directive)
        if key not in seen:
            seen.add(key)
            plan.append(key)
    return plan


def apply_remediation(
    manifest: RandomnessManifest, plan: list[tuple[str, Directive]]
) -> RandomnessManifest:
    """Return a manifest reflecting the plan's rebinds (for re-evaluation)."""
    directives: dict[str, list[Directive]] = {}
    for fn_id, directive in plan:
        directives.setdefault(fn_id, []).append(directive)
    functions = []
    for fn in manifest.functions:
        todo = directives.get(fn.id, [])
        gen = fn.generator
        if todo:
            algorithm = gen.algorithm if gen else Algorithm.MT19937
            if Directive.REPLACE_WITH_CSPRNG in todo:
                algorithm = Algorithm.CSPRNG_CTR
            gen = GeneratorFact(algorithm=algorithm, seed_source=OsEntropy())
        functions.append(
            FunctionFact(fn.id, fn.declared_distribution, gen, fn.context)
        )
    return RandomnessManifest(functions, list(manifest.edges), set(manifest.core_rng_ids))


# ---------------------------------------------------------------------------
# JSON manifest format: {"functions": [...], "edges": [[caller, callee], ...],
#                        "core_rng_ids": [...]}


def _function_from_json(obj: dict) -> FunctionFact:
    if "id" not in obj:
        raise MalformedManifest(f"function object without id: {obj!r}")
    dist = obj.get("distribution")
    gen = obj.get("generator")
    ctx = obj.get("context")
    try:
        declared = spec_from_json(dist) if dist else None
        generator = (
            GeneratorFact(
                algorithm=Algorithm(gen["algorithm"]),
                seed_source=seed_source_from_json(gen["seed_source"]),
            )
            if gen
            else None
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedManifest(f"bad facts for {obj['id']!r}: {exc}") from exc
    context = None
    if ctx and ctx != "general":
        if isinstance(ctx, dict) and ctx.get("kind") == "differential_privacy":
            context = DpContext(epsilon=ctx["epsilon"], delta=ctx["delta"])
        else:
            raise MalformedManifest(f"unknown context for {obj['id']!r}: {ctx!r}")
    return FunctionFact(obj["id"], declared, generator, context)


def function_to_json(fn: FunctionFact) -> dict:
    out: dict = {"id": fn.id}
    if fn.declared_distribution is not None:
        out["distribution"] = fn.declared_distribution.to_json()
    if fn.generator is not None:
        out["generator"] = {
            "algorithm": fn.generator.algorithm.value,
            "seed_source": fn.generator.seed_source.to_json(),
        }
    if fn.context is not None:
        out["context"] = {
            "kind": "differential_privacy",
            "epsilon": fn.context.epsilon,
            "delta": fn.context.delta,
        }
    else:
        out["context"] = "general"
    return out


def manifest_from_json(obj: dict) -> RandomnessManifest:
    try:
        functions = [_function_from_json(f) for f in obj["functions"]]
        edges = [(str(c[0]), str(c[1])) for c in obj["edges"]]
        core = {str(i) for i in obj["core_rng_ids"]}
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedManifest(f"manifest missing structure: {exc}") from exc
    manifest = RandomnessManifest(functions, edges, core)
    manifest.validate()
    return manifest


def manifest_to_json(manifest: RandomnessManifest) -> dict:
    return {
        "functions": [function_to_json(f) for f in manifest.functions],
        "edges": [list(e) for e in manifest.edges],
        "core_rng_ids": sorted(manifest.core_rng_ids),
    }


def load_manifest(path: str) -> RandomnessManifest:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedManifest(f"not valid JSON: {exc}") from exc
    return manifest_from_json(obj)
