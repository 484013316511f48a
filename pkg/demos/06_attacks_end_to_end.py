"""Attack simulations: the seed kill chain and transform tampering.

Run: python demos/06_attacks_end_to_end.py
"""

import json

from rngsentinel.attacks import (
    TimeWindowSeedScenario,
    TransformSubstitutionScenario,
    run_scenario,
)
from rngsentinel.transforms import Normal, UniformReal

# Kill chain: a DP noise generator seeded from a 0.5 s clock window at
# microsecond precision leaves ~19 bits of entropy. Recover the seed from
# four observed words, regenerate the noise, denoise the "gradients".
scenario = TimeWindowSeedScenario(
    window_s=0.5, resolution_us=1, target_slot="dp_noise",
    window_start_us=1_700_000_000_000_000, grad_len=500)
print("=== time-window seed kill chain ===")
for entry in run_scenario(scenario):
    print(json.dumps(entry))

# Supply-chain tampering: the weight initializer claims N(0,1) but was
# replaced to emit raw uniforms. Dynamic auditing flags every batch;
# enforcement swaps in a CSPRNG with the declared transform and the
# stream passes again.
print("\n=== transform substitution + enforcement ===")
scenario = TransformSubstitutionScenario(
    claimed=Normal(0.0, 1.0), actual=UniformReal(0.0, 1.0),
    target_slot="kaiming_init", batches=50, seed=1303)
for entry in run_scenario(scenario):
    print(json.dumps(entry))
