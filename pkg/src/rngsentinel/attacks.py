"""Attack simulations: weak-seed exploitation and transform tampering.

Attacks are in-process substitutions on auditor registry slots, the same
abstraction level at which a compromised library would operate. The seed
kill chain runs end to end: a clock-derived seed inside a known window is
brute-forced back from a handful of observed outputs, the noise stream is
regenerated, and the "private" values are recovered by subtraction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .auditor import Auditor, AuditorConfig, Mode
from .errors import InvalidWindow, SpecMismatch, UnknownSlot
from .generators import (
    LCG_INC,
    LCG_MULT,
    PHILOX_M0,
    PHILOX_M1,
    PHILOX_ROUNDS,
    PHILOX_W0,
    PHILOX_W1,
    Algorithm,
    make_generator,
)
from .policy import (
    Directive,
    FunctionFact,
    GeneratorFact,
    RandomnessManifest,
    evaluate_policies,
    remediation_plan,
)
from .seeds import Constant, OsEntropy, seed_from_source
from .transforms import (
    DistributionSpec,
    Laplace,
    Normal,
    sample_stream,
    spec_from_json,
)

_MASK32 = 0xFFFFFFFF


def entropy_bits(window_s: float, resolution_us: int) -> float:
    """Effective seed entropy of a clock window: log2(window_s * 1e6 / res)."""
    if window_s <= 0 or resolution_us < 1:
        raise InvalidWindow(
            f"need window_s > 0 and resolution_us >= 1, got {window_s}, {resolution_us}")
    candidates = window_s * 1e6 / resolution_us
    if candidates < 1:
        raise InvalidWindow("window narrower than the clock resolution")
    return math.log2(candidates)


def generate_words(algorithm: Algorithm | str, seed: int, k: int) -> list[int]:
    """First k raw output words for (algorithm, seed), at native width."""
    gen = make_generator(Algorithm(algorithm), seed=seed)
    return [gen.next_word() for _ in range(k)]


# ---------------------------------------------------------------------------
# Vectorized candidate scans. Each returns a bool mask over the seed chunk
# for "reproduces the first min(k, 4) observed words"; brute_force_seed
# re-verifies every masked hit against the full observation.


def _scan_weak_lcg(observed: list[int], seeds: np.ndarray) -> np.ndarray:
    states = seeds.copy()
    mult = np.uint64(LCG_MULT)
    inc = np.uint64(LCG_INC)
    mask = np.ones(len(seeds), dtype=bool)
    for word in observed:
        states = states * mult + inc
        mask &= states == np.uint64(word)
        if not mask.any():
            break
    return mask


def mt19937_output_words(seeds: np.ndarray, k: int) -> list[np.ndarray]:
    """First k tempered 32-bit words for every seed, vectorized over seeds.

    The seeding recurrence is sequential in the state index but embarrassingly
    parallel across candidates; only the state rows the first k outputs touch
    are retained.
    """
    needed = {i for j in range(k) for i in (j, j + 1, j + 397)}
    row = (seeds & np.uint64(_MASK32)).astype(np.uint64)
    rows: dict[int, np.ndarray] = {}
    if 0 in needed:
        rows[0] = row
    for i in range(1, 624):
        row = (np.uint64(1812433253) * (row ^ (row >> np.uint64(30))) + np.uint64(i)) \
            & np.uint64(_MASK32)
        if i in needed:
            rows[i] = row
    upper = np.uint64(0x80000000)
    lower = np.uint64(0x7FFFFFFF)
    matrix_a = np.uint64(0x9908B0DF)
    words: list[np.ndarray] = []
    for j in range(k):
        y = (rows[j] & upper) | (rows[j + 1] & lower)
        val = rows[j + 397] ^ (y >> np.uint64(1)) ^ ((y & np.uint64(1)) * matrix_a)
        val ^= val >> np.uint64(11)
        val ^= (val << np.uint64(7)) & np.uint64(0x9D2C5680)
        val ^= (val << np.uint64(15)) & np.uint64(0xEFC60000)
        val = val & np.uint64(_MASK32)
        val ^= val >> np.uint64(18)
        words.append(val)
    return words


def _scan_mt19937(observed: list[int], seeds: np.ndarray) -> np.ndarray:
    words = mt19937_output_words(seeds, len(observed))
    mask = np.ones(len(seeds), dtype=bool)
    for j, word in enumerate(observed):
        mask &= words[j] == np.uint64(word)
        if not mask.any():
            break
    return mask


def _philox_block_vec(k0: np.ndarray, k1: np.ndarray, block: int):
    x0 = np.full_like(k0, block & _MASK32)
    x1 = np.full_like(k0, (block >> 32) & _MASK32)
    x2 = np.zeros_like(k0)
    x3 = np.zeros_like(k0)
    k0 = k0.copy()
    k1 = k1.copy()
    m0 = np.uint64(PHILOX_M0)
    m1 = np.uint64(PHILOX_M1)
    w0 = np.uint64(PHILOX_W0)
    w1 = np.uint64(PHILOX_W1)
    m32 = np.uint64(_MASK32)
    for _ in range(PHILOX_ROUNDS):
        p0 = m0 * x0
        p1 = m1 * x2
        x0, x1, x2, x3 = (
            ((p1 >> np.uint64(32)) ^ x1 ^ k0) & m32,
            p1 & m32,
            ((p0 >> np.uint64(32)) ^ x3 ^ k1) & m32,
            p0 & m32,
        )
        k0 = (k0 + w0) & m32
        k1 = (k1 + w1) & m32
    return x0, x1, x2, x3


def _scan_philox(observed: list[int], seeds: np.ndarray) -> np.ndarray:
    k0 = seeds & np.uint64(_MASK32)
    k1 = seeds >> np.uint64(32)
    mask = np.ones(len(seeds), dtype=bool)
    n_blocks = (len(observed) + 1) // 2
    for block in range(n_blocks):
        x0, x1, x2, x3 = _philox_block_vec(k0, k1, block)
        words = ((x1 << np.uint64(32)) | x0, (x3 << np.uint64(32)) | x2)
        for half in range(2):
            idx = 2 * block + half
            if idx >= len(observed):
                break
            mask &= words[half] == np.uint64(observed[idx])
        if not mask.any():
            break
    return mask


_SCANNERS = {
    Algorithm.WEAK_LCG: _scan_weak_lcg,
    Algorithm.MT19937: _scan_mt19937,
    Algorithm.PHILOX: _scan_philox,
}

_SCAN_CHUNK = 1 << 19


def brute_force_seed(observed, algorithm: Algorithm | str, candidate_seeds,
                     chunk_size: int = _SCAN_CHUNK) -> int | None:
    """First candidate seed whose generator reproduces all observed words.

    ``observed`` holds raw words at the algorithm's native width (32-bit
    tempered words for mt19937, 64-bit otherwise). Ranges of candidates
    are scanned in vectorized chunks; any other iterable falls back to a
    per-candidate loop. Returns None when nothing matches.
    """
    algorithm = Algorithm(algorithm)
    observed = [int(w) for w in observed]
    if not observed:
        raise ValueError("need at least one observed word")

    if isinstance(candidate_seeds, range) and algorithm in _SCANNERS and \
            candidate_seeds.step > 0:
        scanner = _SCANNERS[algorithm]
        prefix = observed[:4]
        r = candidate_seeds
        for chunk_start in range(0, len(r), chunk_size):
            lo = r.start + chunk_start * r.step
            hi = min(r.start + (chunk_start + chunk_size) * r.step, r.stop)
            seeds = np.arange(lo, hi, r.step, dtype=np.uint64)
            mask = scanner(prefix, seeds)
            if mask.any():
                for idx in np.flatnonzero(mask):
                    seed = int(seeds[idx])
                    if generate_words(algorithm, seed, len(observed)) == observed:
                        return seed
        return None

    k = len(observed)
    for seed in candidate_seeds:
        if generate_words(algorithm, int(seed), k) == observed:
            return int(seed)
    return None


def denoise_dp_updates(noisy, recovered_seed: int, noise_spec: DistributionSpec,
                       algorithm: Algorithm | str = Algorithm.PHILOX) -> list[float]:
    """Subtract the regenerated noise stream from noisy values.

    Exact cancellation requires the same algorithm, seed, and spec that
    produced the noise; a wrong seed leaves residuals with roughly twice
    the noise variance.
    """
    if getattr(noise_spec, "discrete", False):
        raise SpecMismatch("DP noise must be a continuous distribution")
    noisy = list(noisy)
    if not noisy:
        return []
    gen = make_generator(Algorithm(algorithm), seed=recovered_seed)
    noise = sample_stream(gen, noise_spec, len(noisy))
    return [y - n for y, n in zip(noisy, noise)]


def substitute_transform(auditor: Auditor, slot: str,
                         actual: DistributionSpec) -> None:
    """Redirect a slot's draw path to ``actual`` while it still declares
    its original spec; used to validate detection."""
    gen = auditor.registry.get(slot)
    if gen is None:
        raise UnknownSlot(slot)
    gen.set_actual(actual)


def apply_mean_bias(auditor: Auditor, slot: str, bias: float) -> None:
    """Shift a normal slot's mean by ``bias`` standard deviations."""
    gen = auditor.registry.get(slot)
    if gen is None:
        raise UnknownSlot(slot)
    spec = gen.spec
    if not isinstance(spec, Normal):
        raise SpecMismatch("mean-bias attack is defined for normal slots")
    gen.set_actual(Normal(spec.mu + bias * spec.sigma, spec.sigma))


# ---------------------------------------------------------------------------
# Scenario descriptions and the end-to-end runner.


@dataclass
class ConstantSeedScenario:
    value: int
    target_slot: str
    kind = "constant_seed"


@dataclass
class TimeWindowSeedScenario:
    window_s: float
    resolution_us: int
    target_slot: str
    algorithm: Algorithm = Algorithm.PHILOX
    noise: DistributionSpec = field(default_factory=lambda: Laplace(0.0, 1.0))
    grad_len: int = 1000
    window_start_us: int | None = None  # None: current clock
    seed_offset_us: int | None = None   # None: drawn from OS entropy
    observed_words: int = 4

    @property
    def entropy_bits(self) -> float:
        return entropy_bits(self.window_s, self.resolution_us)

    kind = "time_window_seed"


@dataclass
class TransformSubstitutionScenario:
    claimed: DistributionSpec
    actual: DistributionSpec
    target_slot: str
    batches: int = 100
    seed: int | None = None
    kind = "transform_substitution"


@dataclass
class BiasedGeneratorScenario:
    bias: float
    target_slot: str
    batches: int = 100
    seed: int | None = None
    kind = "biased_generator"


AttackScenario = (ConstantSeedScenario | TimeWindowSeedScenario |
                  TransformSubstitutionScenario | BiasedGeneratorScenario)


def scenario_from_json(obj: dict) -> AttackScenario:
    kind = obj.get("kind")
    if kind == "constant_seed":
        return ConstantSeedScenario(value=int(obj["value"]),
                                    target_slot=obj["target_slot"])
    if kind == "time_window_seed":
        scenario = TimeWindowSeedScenario(
            window_s=float(obj["window_s"]),
            resolution_us=int(obj["resolution_us"]),
            target_slot=obj["target_slot"],
        )
        if "algorithm" in obj:
            scenario.algorithm = Algorithm(obj["algorithm"])
        if "noise" in obj:
            scenario.noise = spec_from_json(obj["noise"])
        for key in ("grad_len", "window_start_us", "seed_offset_us", "observed_words"):
            if key in obj and obj[key] is not None:
                setattr(scenario, key, int(obj[key]))
        return scenario
    if kind == "transform_substitution":
        return TransformSubstitutionScenario(
            claimed=spec_from_json(obj["claimed"]),
            actual=spec_from_json(obj["actual"]),
            target_slot=obj["target_slot"],
            batches=int(obj.get("batches", 100)),
            seed=obj.get("seed"),
        )
    if kind == "biased_generator":
        return BiasedGeneratorScenario(
            bias=float(obj["bias"]),
            target_slot=obj["target_slot"],
            batches=int(obj.get("batches", 100)),
            seed=obj.get("seed"),
        )
    raise ValueError(f"unknown scenario kind: {kind!r}")


def _gradient_fixture(n: int, seed: int = 20240915) -> np.ndarray:
    """Synthetic linear-regression gradients: g = 2/m * X^T (X w - y)."""
    rng = np.random.default_rng(seed)
    m = max(2 * n, 16)
    x = rng.standard_normal((m, n))
    w = rng.standard_normal(n)
    y = x @ rng.standard_normal(n) + 0.1 * rng.standard_normal(m)
    return 2.0 / m * x.T @ (x @ w - y)


def run_time_window_scenario(scenario: TimeWindowSeedScenario) -> list[dict]:
    """The seed kill chain: window arithmetic, brute force, denoise."""
    res = scenario.resolution_us
    window_us = int(scenario.window_s * 1e6)
    if scenario.window_start_us is not None:
        start = scenario.window_start_us - scenario.window_start_us % res
    else:
        now = time.time_ns() // 1000
        start = (now - window_us) - (now - window_us) % res
    n_candidates = window_us // res
    if scenario.seed_offset_us is not None:
        offset = scenario.seed_offset_us
    else:
        offset = seed_from_source(OsEntropy()) % window_us
    true_seed = start + offset - (start + offset) % res

    transcript: list[dict] = [{
        "step": "scenario",
        "kind": scenario.kind,
        "target_slot": scenario.target_slot,
        "window_s": scenario.window_s,
        "resolution_us": res,
        "entropy_bits": scenario.entropy_bits,
        "algorithm": scenario.algorithm.value,
    }]

    # Victim: clock-seeded generator produces the DP noise stream.
    gradients = _gradient_fixture(scenario.grad_len)
    victim = make_generator(scenario.algorithm, seed=true_seed)
    noise = sample_stream(victim, scenario.noise, scenario.grad_len)
    noisy = [g + n for g, n in zip(gradients, noise)]

    # Attacker: observes the first raw words, scans the window.
    observed = generate_words(scenario.algorithm, true_seed, scenario.observed_words)
    t0 = time.perf_counter()
    recovered = brute_force_seed(
        observed, scenario.algorithm,
        range(start, start + window_us, res))
    elapsed = time.perf_counter() - t0
    transcript.append({
        "step": "brute_force",
        "search_size": n_candidates,
        "observed_words": scenario.observed_words,
        "recovered_seed": recovered,
        "recovery_s": round(elapsed, 3),
    })
    if recovered is None:
        transcript.append({"step": "outcome", "detection": False,
                           "detail": "seed not found in window"})
        return transcript

    denoised = denoise_dp_updates(noisy, recovered, scenario.noise,
                                  scenario.algorithm)
    residual = float(np.max(np.abs(np.asarray(denoised) - gradients)))
    transcript.append({
        "step": "denoise",
        "elements": scenario.grad_len,
        "max_abs_residual": residual,
    })
    transcript.append({
        "step": "outcome",
        "detection": True,
        "detail": "seed recovered and noise cancelled"
        if residual < 1e-9 else "seed recovered but residuals remain",
    })
    return transcript


def run_constant_seed_scenario(scenario: ConstantSeedScenario) -> list[dict]:
    """Static policy catches a constant seed before any draw happens."""
    manifest = RandomnessManifest(
        functions=[FunctionFact(
            scenario.target_slot,
            generator=GeneratorFact(Algorithm.MT19937, Constant(scenario.value)),
        )],
        edges=[],
        core_rng_ids={scenario.target_slot},
    )
    violations = evaluate_policies(manifest)
    plan = remediation_plan(violations)
    transcript = [{
        "step": "scenario", "kind": scenario.kind,
        "target_slot": scenario.target_slot, "constant": scenario.value,
    }]
    transcript += [{"step": "violation", **v.to_json()} for v in violations]
    transcript += [{"step": "remediation", "slot": s, "directive": d.value}
                   for s, d in plan]
    transcript.append({
        "step": "outcome",
        "detection": bool(violations),
        "detail": "flagged before any draw" if violations else "no violation",
    })
    return transcript


def _warn_rate(auditor: Auditor, gen, batches: int) -> float:
    batch = auditor.config.batch_size
    for _ in range(batches * batch):
        gen.draw()
    records = auditor.drain_reports(timeout=120.0)
    if not records:
        return 0.0
    warns = sum(1 for r in records if r.report.verdict == "warn")
    return warns / len(records)


def run_substitution_scenario(scenario: TransformSubstitutionScenario) -> list[dict]:
    """Tampered transform: detect via KS, enforce, verify recovery."""
    seed = scenario.seed if scenario.seed is not None \
        else seed_from_source(OsEntropy())
    transcript = [{
        "step": "scenario", "kind": scenario.kind,
        "target_slot": scenario.target_slot,
        "claimed": scenario.claimed.describe(),
        "actual": scenario.actual.describe(),
    }]
    with Auditor(AuditorConfig(mode=Mode.ASN)) as auditor:
        inner = make_generator(Algorithm.MT19937, seed=seed)
        gen = auditor.wrap(inner, scenario.claimed, slot=scenario.target_slot)
        clean = scenario.actual == scenario.claimed
        if not clean:
            substitute_transform(auditor, scenario.target_slot, scenario.actual)
        attack_rate = _warn_rate(auditor, gen, scenario.batches)
        transcript.append({"step": "attack", "batches": scenario.batches,
                           "warn_rate": attack_rate})
        auditor.enforce([(scenario.target_slot, Directive.REPLACE_WITH_CSPRNG)])
        transcript.append({"step": "enforce", "slot": scenario.target_slot,
                           "directive": Directive.REPLACE_WITH_CSPRNG.value,
                           "security_class": gen.security_class.value})
        recovered_rate = _warn_rate(auditor, gen, scenario.batches)
        transcript.append({"step": "recovered", "batches": scenario.batches,
                           "warn_rate": recovered_rate})
    detection = attack_rate > 0.5 if not clean else False
    transcript.append({
        "step": "outcome",
        "detection": detection,
        "detail": ("substitution flagged, enforcement restored the stream"
                   if detection else "no violation"),
    })
    return transcript


def run_biased_generator_scenario(scenario: BiasedGeneratorScenario) -> list[dict]:
    """Mean-shift attack on a normal slot, detected with the Z test."""
    seed = scenario.seed if scenario.seed is not None \
        else seed_from_source(OsEntropy())
    transcript = [{
        "step": "scenario", "kind": scenario.kind,
        "target_slot": scenario.target_slot, "bias": scenario.bias,
    }]
    config = AuditorConfig(mode=Mode.ASN, continuous_test="z")
    with Auditor(config) as auditor:
        inner = make_generator(Algorithm.MT19937, seed=seed)
        gen = auditor.wrap(inner, Normal(0.0, 1.0), slot=scenario.target_slot)
        apply_mean_bias(auditor, scenario.target_slot, scenario.bias)
        rate = _warn_rate(auditor, gen, scenario.batches)
    transcript.append({"step": "attack", "batches": scenario.batches,
                       "warn_rate": rate})
    transcript.append({
        "step": "outcome",
        "detection": rate > 0.5,
        "detail": "mean shift flagged" if rate > 0.5 else "bias below detection power",
    })
    return transcript


def run_scenario(scenario: AttackScenario) -> list[dict]:
    if isinstance(scenario, TimeWindowSeedScenario):
        return run_time_window_scenario(scenario)
    if isinstance(scenario, ConstantSeedScenario):
        return run_constant_seed_scenario(scenario)
    if isinstance(scenario, TransformSubstitutionScenario):
        return run_substitution_scenario(scenario)
    if isinstance(scenario, BiasedGeneratorScenario):
        return run_biased_generator_scenario(scenario)
    raise TypeError(f"not an AttackScenario: {scenario!r}")
