"""The three auditor execution modes and their cost.

Run: python demos/05_audit_modes.py
"""

import time

from rngsentinel import (
    Algorithm,
    Auditor,
    AuditorConfig,
    Mode,
    Normal,
    make_generator,
)
from rngsentinel.bench import run_bench

# Same workload, three modes: watch the report counts.
for mode in Mode:
    config = AuditorConfig(mode=mode)
    with Auditor(config) as auditor:
        gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=99),
                           Normal(0.0, 1.0), slot="demo")
        t0 = time.perf_counter()
        for _ in range(200 * 100):
            gen.draw()
        records = auditor.drain_reports(timeout=60.0)
        dt = time.perf_counter() - t0
    warns = sum(r.report.verdict == "warn" for r in records)
    print(f"{mode.value:9s} 200 batches -> {len(records):3d} reports "
          f"({warns} warn) in {dt:.2f}s")

# The wrapped stream is bit-identical to the unwrapped one: auditing is
# observation, not perturbation.
from rngsentinel import sample_stream  # noqa: E402

plain = sample_stream(make_generator(Algorithm.MT19937, seed=5), Normal(0, 1), 300)
with Auditor(AuditorConfig(mode=Mode.ASN)) as auditor:
    gen = auditor.wrap(make_generator(Algorithm.MT19937, seed=5), Normal(0, 1))
    wrapped = [gen.draw() for _ in range(300)]
print("\ntransparency (bit-identical draws):", wrapped == plain)

# Relative overhead on a smaller workload (the acceptance suite runs the
# full 10^6-draw version).
print("\nbench, 2000 batches, median of 3:")
for row in run_bench(batches=2000, repeats=3):
    print(f"  {row['mode']:9s} {row['median_s']:7.3f}s  "
          f"x{row['ratio_vs_unwrapped']:.2f}")
