"""Distribution transforms over raw 64-bit generator words.

Every transform is a pure function of its inputs, so the same code path
serves honest generation, the audited draw path, and attack-simulation
substitution. Raw words map to the unit interval as word / 2**64 (see
``raw_to_unit_interval`` for the half-open rounding caveat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DomainError, InvalidRange, InvalidScale
from .generators import GeneratorHandle, raw_to_unit_interval
from .special import normal_cdf

_TWO_PI = 2.0 * math.pi
_TINY = math.nextafter(0.0, 1.0)


def to_uniform_real(u: int, a: float, b: float) -> float:
    """u / 2**64 * (b - a) + a, in [a, b)."""
    if not a < b:
        raise InvalidRange(f"need a < b, got a={a}, b={b}")
    z = raw_to_unit_interval(u) * (b - a) + a
    if z >= b:  # rounding at the top of wide intervals can touch b
        z = math.nextafter(b, a)
    return z


def to_uniform_int(u: int, a: int, b: int) -> int:
    """u mod (b - a) + a, in [a, b)."""
    if not a < b:
        raise InvalidRange(f"need a < b, got a={a}, b={b}")
    return u % (b - a) + a


def box_muller(u0: float, u1: float) -> tuple[float, float]:
    """Two independent standard normal samples from u0 in (0, 1], u1 in [0, 1).

    Callers that feed raw words map word 0 to the next representable value
    above 0 before invoking; u0 = 0 itself is a domain error (ln 0).
    """
    if u0 == 0.0:
        raise DomainError("box_muller requires u0 > 0 (ln 0 undefined)")
    if not 0.0 < u0 <= 1.0 or not 0.0 <= u1 < 1.0:
        raise DomainError(f"box_muller domain: u0 in (0,1], u1 in [0,1); got {u0}, {u1}")
    r = math.sqrt(-2.0 * math.log(u0))
    angle = _TWO_PI * u1
    return r * math.cos(angle), r * math.sin(angle)


def scale_normal(z: float, mu: float, sigma: float) -> float:
    if sigma <= 0.0:
        raise InvalidScale(f"sigma must be positive, got {sigma}")
    return sigma * z + mu


def to_laplace(u: float, mu: float, b: float) -> float:
    """Inverse-CDF Laplace sample from u in (-1, 1).

    mu - b * sgn(u) * ln(1 - |u|). The ln(1 + |u|) variant sometimes seen
    in print has bounded support and is not Laplace-distributed; the test
    suite demonstrates the difference.
    """
    if b <= 0.0:
        raise InvalidScale(f"scale must be positive, got {b}")
    if abs(u) >= 1.0:
        raise DomainError(f"to_laplace requires |u| < 1, got {u}")
    if u == 0.0:
        return mu
    sign = 1.0 if u > 0.0 else -1.0
    return mu - b * sign * math.log(1.0 - abs(u))


# ---------------------------------------------------------------------------
# Distribution specs


@dataclass(frozen=True)
class UniformReal:
    a: float
    b: float
    family = "uniform_real"
    discrete = False

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidRange(f"uniform_real needs a < b, got [{self.a}, {self.b})")

    def cdf(self, x: float) -> float:
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return 1.0
        return (x - self.a) / (self.b - self.a)

    def standardize(self, x: float) -> float:
        return (x - self.a) / (self.b - self.a)

    def standard(self) -> "UniformReal":
        return UniformReal(0.0, 1.0)

    def describe(self) -> str:
        return f"uniform_real({self.a:g},{self.b:g})"

    def to_json(self) -> dict:
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class UniformInt:
    a: int
    b: int
    family = "uniform_int"
    discrete = True

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidRange(f"uniform_int needs a < b, got [{self.a}, {self.b})")

    def cdf(self, x: float) -> float:
        if x < self.a:
            return 0.0
        if x >= self.b - 1:
            return 1.0
        return (math.floor(x) + 1 - self.a) / (self.b - self.a)

    def describe(self) -> str:
        return f"uniform_int({self.a},{self.b})"

    def to_json(self) -> dict:
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float
    family = "normal"
    discrete = False

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise InvalidScale(f"normal needs sigma > 0, got {self.sigma}")

    def cdf(self, x: float) -> float:
        return normal_cdf((x - self.mu) / self.sigma)

    def standardize(self, x: float) -> float:
        return (x - self.mu) / self.sigma

    def standard(self) -> "Normal":
        return Normal(0.0, 1.0)

    def describe(self) -> str:
        return f"normal({self.mu:g},{self.sigma:g})"

    def to_json(self) -> dict:
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Laplace:
    mu: float
    b: float
    family = "laplace"
    discrete = False

    def __post_init__(self):
        if self.b <= 0.0:
            raise InvalidScale(f"laplace needs b > 0, got {self.b}")

    def cdf(self, x: float) -> float:
        z = (x - self.mu) / self.b
        if z < 0.0:
            return 0.5 * math.exp(z)
        return 1.0 - 0.5 * math.exp(-z)

    def standardize(self, x: float) -> float:
        return (x - self.mu) / self.b

    def standard(self) -> "Laplace":
        return Laplace(0.0, 1.0)

    def describe(self) -> str:
        return f"laplace({self.mu:g},{self.b:g})"

    def to_json(self) -> dict:
        return {"family": self.family, "mu": self.mu, "b": self.b}


DistributionSpec = UniformReal | UniformInt | Normal | Laplace

_FAMILIES = {
    "uniform_real": UniformReal,
    "uniform_int": UniformInt,
    "normal": Normal,
    "laplace": Laplace,
}


def spec_from_json(obj: dict) -> DistributionSpec:
    family = obj.get("family")
    if family not in _FAMILIES:
        raise ValueError(f"unknown distribution family: {family!r}")
    fields = {k: v for k, v in obj.items() if k != "family"}
    return _FAMILIES[family](**fields)


def parse_spec(text: str) -> DistributionSpec:
    """Parse the compact CLI form: ``uniform:a,b``, ``uniformint:a,b``,
    ``normal:mu,sigma``, ``laplace:mu,b``."""
    name, _, args = text.partition(":")
    name = name.strip().lower()
    parts = [p for p in args.split(",") if p != ""]
    if name in ("uniform", "uniform_real"):
        a, b = (float(p) for p in parts) if parts else (0.0, 1.0)
        return UniformReal(a, b)
    if name in ("uniformint", "uniform_int", "int"):
        a, b = (int(p) for p in parts)
        return UniformInt(a, b)
    if name in ("normal", "gauss", "gaussian"):
        mu, sigma = (float(p) for p in parts) if parts else (0.0, 1.0)
        return Normal(mu, sigma)
    if name == "laplace":
        mu, b = (float(p) for p in parts) if parts else (0.0, 1.0)
        return Laplace(mu, b)
    raise ValueError(f"unknown distribution spec: {text!r}")


# ---------------------------------------------------------------------------
# Sampling drivers


def samples_from_words(words: Iterable[int], spec: DistributionSpec) -> Iterator[float]:
    """Transform a stream of raw 64-bit words into samples of ``spec``.

    Word 0 maps to the smallest positive unit value before log-based
    transforms so the stream is total over the generator's output range.
    Normal consumes two words and yields two samples per step.
    """
    it = iter(words)
    if isinstance(spec, UniformReal):
        a, span = spec.a, spec.b - spec.a
        b = spec.b
        for w in it:
            z = raw_to_unit_interval(w) * span + a
            yield z if z < b else math.nextafter(b, a)
    elif isinstance(spec, UniformInt):
        a, span = spec.a, spec.b - spec.a
        for w in it:
            yield w % span + a
    elif isinstance(spec, Normal):
        mu, sigma = spec.mu, spec.sigma
        while True:
            try:
                w0 = next(it)
                w1 = next(it)
            except StopIteration:
                return
            u0 = raw_to_unit_interval(w0) or _TINY
            u1 = raw_to_unit_interval(w1)
            z0, z1 = box_muller(u0, u1)
            yield sigma * z0 + mu
            yield sigma * z1 + mu
    elif isinstance(spec, Laplace):
        mu, b = spec.mu, spec.b
        for w in it:
            u = 2.0 * (raw_to_unit_interval(w) or _TINY) - 1.0
            yield to_laplace(u, mu, b)
    else:
        raise TypeError(f"not a DistributionSpec: {spec!r}")


def sample_iter(gen: GeneratorHandle, spec: DistributionSpec) -> Iterator[float]:
    """Endless sample stream drawn from a generator handle."""

    def words() -> Iterator[int]:
        next_u64 = gen.next_u64
        while True:
            yield next_u64()

    return samples_from_words(words(), spec)


def sample_stream(gen: GeneratorHandle, spec: DistributionSpec, count: int) -> list:
    """Materialize ``count`` samples from a generator."""
    out = []
    it = sample_iter(gen, spec)
    for _ in range(count):
        out.append(next(it))
    return out
