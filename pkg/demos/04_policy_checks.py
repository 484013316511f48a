"""Static policy evaluation over a randomness manifest.

Run: python demos/04_policy_checks.py
"""

import json

from rngsentinel import (
    Algorithm,
    BoundedRange,
    DpContext,
    FunctionFact,
    GeneratorFact,
    OsEntropy,
    RandomnessManifest,
    SystemTime,
    evaluate_policies,
    remediation_plan,
    transitive_rng_closure,
)
from rngsentinel.policy import apply_remediation

# A small call graph: two pipeline stages funnel into one core RNG entry.
manifest = RandomnessManifest(
    functions=[
        FunctionFact("train.init_weights"),
        FunctionFact("train.dp_noise",
                     generator=GeneratorFact(Algorithm.MT19937, OsEntropy()),
                     context=DpContext(epsilon=50.0, delta=1e-5)),
        FunctionFact("data.shuffle",
                     generator=GeneratorFact(Algorithm.PHILOX,
                                             SystemTime(resolution_us=1))),
        FunctionFact("util.seed_picker",
                     generator=GeneratorFact(Algorithm.MT19937,
                                             BoundedRange(lo=1, hi=10**9))),
        FunctionFact("core.rand"),
        FunctionFact("log.format"),  # never touches randomness
    ],
    edges=[
        ("train.init_weights", "core.rand"),
        ("train.dp_noise", "core.rand"),
        ("data.shuffle", "core.rand"),
        ("util.seed_picker", "core.rand"),
    ],
    core_rng_ids={"core.rand"},
)

closure = transitive_rng_closure(manifest)
print("transitive RNG closure:", sorted(closure))
print("outside the closure:", sorted({f.id for f in manifest.functions} - closure))

violations = evaluate_policies(manifest)
print("\nviolations:")
for v in violations:
    print(json.dumps(v.to_json()))

plan = remediation_plan(violations)
print("\nremediation plan:")
for slot, directive in plan:
    print(f"  {slot}: {directive.value}")

fixed = apply_remediation(manifest, plan)
remaining = [v for v in evaluate_policies(fixed) if v.severity.value == "error"]
print("\nerror-severity violations after remediation:", len(remaining))
