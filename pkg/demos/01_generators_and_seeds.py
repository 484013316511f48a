"""Tour of the generator families and seed provenance.

Run: python demos/01_generators_and_seeds.py
"""

from rngsentinel import (
    Algorithm,
    Constant,
    CtrCsprng,
    Mt19937,
    OsEntropy,
    Philox,
    SystemTime,
    WeakLcg,
    make_generator,
    seed_from_source,
)
from rngsentinel.errors import InsecureSeed

# Every generator is deterministic given (algorithm, seed).
gen = Mt19937(5489)
print("mt19937 seed 5489, first words:", [gen.next_word() for _ in range(4)])
print("  (3499211612 is the published reference value)")

# Philox is counter-based: any output is a pure function of (key, counter).
p = Philox(0xDEADBEEF)
sequential = [p.next_word() for _ in range(6)]
print("\nphilox sequential:", [hex(w)[:12] for w in sequential])
print("philox word_at(3):", hex(p.word_at(3))[:12], "== sequential[3]:",
      p.word_at(3) == sequential[3])

# The weak LCG exists to be attacked: its output IS its state.
w = WeakLcg(42)
leak = w.next_word()
clone = WeakLcg(0)
clone._state = leak
print("\nweak_lcg next output predicted from one leak:",
      clone.next_word() == w.next_word())

# Seed provenance is part of the handle, and entropy is quantified.
print("\nseed source entropy over a 10 s window:")
for source in (OsEntropy(), SystemTime(resolution_us=1), Constant(value=7)):
    print(f"  {source.kind:12s} {source.entropy_bits(window_s=10.0):6.2f} bits")

# A concrete seed is drawn from a source; system time truncates the clock.
print("\nsystem-time seed now:", seed_from_source(SystemTime(resolution_us=1000)))

# The CSPRNG refuses anything but OS entropy. No silent fallback.
c = CtrCsprng()
print("\ncsprng keyed from OS entropy:", hex(c.next_word())[:12])
try:
    make_generator(Algorithm.CSPRNG_CTR, seed_source=SystemTime())
except InsecureSeed as exc:
    print("csprng with a clock seed:", exc)
