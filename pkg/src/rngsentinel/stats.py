"""The statistical audit battery: Z, Kolmogorov-Smirnov, Pearson chi-square,
and the SP800-22 MonoBit frequency test.

Each test returns a TestReport whose verdict is Warn when the p-value
falls below the configured threshold (default 0.01). p-values are floored
at 1e-300 so downstream logarithmic aggregation stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BinTooSparse,
    CountMismatch,
    EmptySample,
    InvalidScale,
    NonFiniteSample,
    SampleTooSmall,
)
from .special import chi2_sf, erfc, kolmogorov_sf

DEFAULT_WARN_THRESHOLD = 0.01
KS_MIN_SAMPLES = 20
CHI2_MIN_EXPECTED = 5.0
CHI2_MIN_TOTAL = 13
MONOBIT_MIN_BITS = 100
P_FLOOR = 1e-300

_SQRT2 = math.sqrt(2.0)


@dataclass
class TestReport:
    test: str
    statistic: float
    p_value: float
    sample_size: int
    target: str
    verdict: str

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "sample_size": self.sample_size,
            "target": self.target,
            "verdict": self.verdict,
        }


def _report(test: str, stat: float, p: float, n: int, target: str,
            threshold: float) -> TestReport:
    p = min(1.0, max(P_FLOOR, p))
    verdict = "warn" if p < threshold else "pass"
    return TestReport(test, float(stat), p, int(n), target, verdict)


def z_test(samples: Sequence[float], mu: float, sigma: float,
           threshold: float = DEFAULT_WARN_THRESHOLD,
           target: str | None = None) -> TestReport:
    """Two-sided Z test of the sample mean against a known population
    mean and standard deviation: Z = (xbar - mu) / (sigma / sqrt(n))."""
    n = len(samples)
    if n < 1:
        raise EmptySample("z_test needs at least one sample")
    if sigma <= 0.0:
        raise InvalidScale(f"sigma must be positive, got {sigma}")
    xbar = float(np.mean(np.asarray(samples, dtype=float)))
    z = (xbar - mu) / (sigma / math.sqrt(n))
    p = erfc(abs(z) / _SQRT2)  # == 2 * (1 - Phi(|z|))
    if target is None:
        target = f"normal({mu:g},{sigma:g})"
    return _report("z", z, p, n, target, threshold)


def ks_statistic(samples: Sequence[float], target_cdf: Callable[[float], float]) -> float:
    """Two-sided D: sup over the empirical step function of
    max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = np.array([target_cdf(v) for v in x], dtype=float)
    i = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1.0) / n)
    return float(max(d_plus, d_minus))


def ks_test(samples: Sequence[float], target_cdf: Callable[[float], float],
            threshold: float = DEFAULT_WARN_THRESHOLD,
            target: str = "cdf") -> TestReport:
    """Kolmogorov-Smirnov goodness-of-fit against an arbitrary CDF."""
    n = len(samples)
    if n < KS_MIN_SAMPLES:
        raise SampleTooSmall(f"ks_test needs n >= {KS_MIN_SAMPLES}, got {n}")
    arr = np.asarray(samples, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteSample("ks_test requires finite samples")
    d = ks_statistic(arr, target_cdf)
    p = kolmogorov_sf(d, n)
    return _report("ks", d, p, n, target, threshold)


def chi_square_test(observed: Sequence[float], expected: Sequence[float],
                    threshold: float = DEFAULT_WARN_THRESHOLD,
                    target: str = "binned") -> TestReport:
    """Pearson chi-square with k - 1 degrees of freedom.

    Validity rules enforced, not assumed: every expected count >= 5,
    total observations >= 13, and observed total equal to the rounded
    expected total.
    """
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise CountMismatch(f"observed has {obs.shape} bins, expected has {exp.shape}")
    k = len(obs)
    if k < 2:
        raise BinTooSparse(f"chi-square needs at least 2 bins, got {k}")
    if np.any(exp < CHI2_MIN_EXPECTED):
        raise BinTooSparse(
            f"every expected count must be >= {CHI2_MIN_EXPECTED}, min is {exp.min():g}"
        )
    total = float(obs.sum())
    if total < CHI2_MIN_TOTAL:
        raise SampleTooSmall(f"chi-square needs total >= {CHI2_MIN_TOTAL}, got {total:g}")
    if round(total) != round(float(exp.sum())):
        raise CountMismatch(
            f"observed total {total:g} != expected total {float(exp.sum()):g}"
        )
    stat = float(np.sum((obs - exp) ** 2 / exp))
    p = chi2_sf(stat, k - 1)
    return _report("chi_square", stat, p, int(total), target, threshold)


def monobit_test(bits: Sequence[int],
                 threshold: float = DEFAULT_WARN_THRESHOLD,
                 target: str = "bit_uniform") -> TestReport:
    """SP800-22 frequency (MonoBit) test: s = |sum(2b - 1)| / sqrt(n),
    p = erfc(s / sqrt(2))."""
    b = np.asarray(bits, dtype=np.uint8)
    n = b.size
    if n < MONOBIT_MIN_BITS:
        raise SampleTooSmall(f"monobit needs n >= {MONOBIT_MIN_BITS} bits, got {n}")
    if not np.all((b == 0) | (b == 1)):
        raise NonFiniteSample("monobit requires a 0/1 bit sequence")
    s = abs(2.0 * int(b.sum()) - n) / math.sqrt(n)
    p = erfc(s / _SQRT2)
    return _report("monobit", s, p, n, target, threshold)


def words_to_bits(words: Sequence[int]) -> np.ndarray:
    """Unpack 64-bit words into a flat bit array (little-endian bit order)."""
    arr = np.asarray(words, dtype=np.uint64)
    return np.unpackbits(arr.view(np.uint8), bitorder="little")


def equal_probability_bin_counts(
    samples: Sequence[float], cdf: Callable[[float], float], k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Bin continuous samples into k bins of equal target probability.

    Maps samples through the target CDF and histograms the images over
    [0, 1]; returns (observed counts, expected counts).
    """
    u = np.array([cdf(x) for x in np.asarray(samples, dtype=float)])
    counts, _ = np.histogram(u, bins=k, range=(0.0, 1.0))
    expected = np.full(k, len(u) / k, dtype=float)
    return counts.astype(float), expected


def uniform_int_bin_counts(
    values: Sequence[int], a: int, b: int, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Bin integer samples from [a, b) into k near-equal-probability groups.

    When (b - a) is not divisible by k the leading bins hold one extra
    integer each and the expected counts scale accordingly.
    """
    m = b - a
    if k > m:
        k = m
    base, rem = divmod(m, k)
    sizes = np.array([base + 1 if i < rem else base for i in range(k)])
    edges = np.concatenate(([0], np.cumsum(sizes)))
    offs = np.asarray(values, dtype=np.int64) - a
    if np.any(offs < 0) or np.any(offs >= m):
        raise NonFiniteSample(f"value outside [{a}, {b})")
    idx = np.searchsorted(edges, offs, side="right") - 1
    counts = np.bincount(idx, minlength=k).astype(float)
    expected = len(offs) * sizes / m
    return counts, expected
