"""Relative-overhead measurements across auditing modes.

Times the producer side of a fixed synthetic workload (batches x 100
normal draws from a seeded mt19937) under five configurations: the bare
generator, the statically enforced pass-through wrapper, and the three
dynamic modes. Worker shutdown and report draining happen outside the
timed region, mirroring how training time is reported. Absolute numbers
are hardware-specific; the stable signal is the ordering and ratios.
"""

from __future__ import annotations

import gc
import statistics
import time
from contextlib import contextmanager

from .auditor import Auditor, AuditorConfig, Mode
from .generators import Algorithm, make_generator
from .policy import Directive
from .transforms import Normal, sample_iter

BENCH_MODES = ("unwrapped", "static", "rasn", "asn", "blocking")

_DYNAMIC = {
    "blocking": Mode.BLOCKING,
    "asn": Mode.ASN,
    "rasn": Mode.RASN,
}


@contextmanager
def _quiet_gc():
    # collector pauses inside a timed region are pure noise
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _time_unwrapped(draws: int, seed: int, spec) -> float:
    gen = make_generator(Algorithm.MT19937, seed=seed)
    it = sample_iter(gen, spec)
    with _quiet_gc():
        t0 = time.perf_counter()
        for _ in range(draws):
            next(it)
        return time.perf_counter() - t0


def _time_static(draws: int, seed: int, spec) -> float:
    auditor = Auditor(AuditorConfig(mode=Mode.ASN))
    inner = make_generator(Algorithm.MT19937, seed=seed)
    gen = auditor.wrap(inner, spec, slot="bench", dynamic=False)
    auditor.enforce([("bench", Directive.RESEED_FROM_OS_ENTROPY)])
    draw = gen.draw
    with _quiet_gc():
        t0 = time.perf_counter()
        for _ in range(draws):
            draw()
        return time.perf_counter() - t0


def _time_dynamic(mode: Mode, draws: int, seed: int, spec,
                  batch_size: int) -> float:
    config = AuditorConfig(mode=mode, batch_size=batch_size)
    with Auditor(config) as auditor:
        inner = make_generator(Algorithm.MT19937, seed=seed)
        gen = auditor.wrap(inner, spec, slot="bench")
        draw = gen.draw
        with _quiet_gc():
            t0 = time.perf_counter()
            for _ in range(draws):
                draw()
            elapsed = time.perf_counter() - t0
        auditor.drain_reports(timeout=300.0)
    return elapsed


def _time_mode(mode: str, draws: int, seed: int, spec,
               batch_size: int) -> float:
    if mode == "unwrapped":
        return _time_unwrapped(draws, seed, spec)
    if mode == "static":
        return _time_static(draws, seed, spec)
    if mode in _DYNAMIC:
        return _time_dynamic(_DYNAMIC[mode], draws, seed, spec, batch_size)
    raise ValueError(f"unknown bench mode: {mode!r}")


def run_bench(batches: int, modes=BENCH_MODES, repeats: int = 5,
              batch_size: int = 100, seed: int = 123456789) -> list[dict]:
    """Median-of-``repeats`` wall times per mode on the same workload.

    Repeats are interleaved across modes in alternating (snake) order so
    that slow periods on a shared machine hit every mode alike instead of
    biasing whichever mode happened to run during them.
    """
    if batches <= 0:
        return []
    spec = Normal(0.0, 1.0)
    draws = batches * batch_size
    for mode in modes:  # untimed warmup of every code path
        _time_mode(mode, min(draws, 10_000), seed, spec, batch_size)
    runs: dict[str, list[float]] = {mode: [] for mode in modes}
    for rep in range(repeats):
        ordering = list(modes) if rep % 2 == 0 else list(reversed(modes))
        for mode in ordering:
            runs[mode].append(_time_mode(mode, draws, seed, spec, batch_size))
    medians = {mode: statistics.median(r) for mode, r in runs.items()}
    base = medians.get("unwrapped")
    return [{
        "mode": mode,
        "batches": batches,
        "batch_size": batch_size,
        "draws": draws,
        "runs_s": [round(r, 6) for r in runs[mode]],
        "median_s": round(medians[mode], 6),
        "ratio_vs_unwrapped": round(medians[mode] / base, 4) if base else None,
    } for mode in modes]
