"""Seed sources and their entropy accounting.

A seed source records *where* a seed came from, not just its value. The
policy layer reasons about provenance (system time and constants are
flagged; bounded ranges are scored by their width), and the attack
simulations exploit exactly the weak provenances this module can express.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

from .errors import InvalidRange, OsEntropyUnavailable

SEED_WIDTH_BITS = 64
_MASK64 = (1 << 64) - 1


class SeedSource:
    """Base class; concrete sources are the frozen dataclasses below."""

    kind: str = ""

    def entropy_bits(self, window_s: float = 1.0) -> float:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class OsEntropy(SeedSource):
    kind = "os_entropy"

    def entropy_bits(self, window_s: float = 1.0) -> float:
        return float(SEED_WIDTH_BITS)

    def to_json(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class SystemTime(SeedSource):
    """Clock-derived seed, truncated to ``resolution_us`` microseconds."""

    resolution_us: int = 1
    kind = "system_time"

    def __post_init__(self) -> None:
        if self.resolution_us < 1:
            raise InvalidRange(f"resolution_us must be >= 1, got {self.resolution_us}")

    def entropy_bits(self, window_s: float = 1.0) -> float:
        # Distinct seed values an attacker must search over a window of
        # window_s seconds: window_s * 1e6 / resolution_us.
        return math.log2(window_s * 1e6 / self.resolution_us)

    def to_json(self) -> dict:
        return {"kind": self.kind, "resolution_us": self.resolution_us}


@dataclass(frozen=True)
class Constant(SeedSource):
    value: int
    kind = "constant"

    def entropy_bits(self, window_s: float = 1.0) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class BoundedRange(SeedSource):
    """Seed drawn uniformly from [lo, hi)."""

    lo: int
    hi: int
    kind = "bounded_range"

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise InvalidRange(f"BoundedRange requires lo < hi, got [{self.lo}, {self.hi})")

    def entropy_bits(self, window_s: float = 1.0) -> float:
        return math.log2(self.hi - self.lo)

    def to_json(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class UserProvided(SeedSource):
    value: int
    kind = "user_provided"

    def entropy_bits(self, window_s: float = 1.0) -> float:
        # Provenance certifies nothing about how the user chose it.
        return 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value}


_KINDS = {
    "os_entropy": OsEntropy,
    "system_time": SystemTime,
    "constant": Constant,
    "bounded_range": BoundedRange,
    "user_provided": UserProvided,
}


def seed_source_from_json(obj: dict) -> SeedSource:
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown seed source kind: {kind!r}")
    fields = {k: v for k, v in obj.items() if k != "kind"}
    return _KINDS[kind](**fields)


def parse_seed_source(text: str) -> SeedSource:
    """Parse the compact CLI form: ``os``, ``time:R``, ``constant:V``,
    ``range:LO,HI``, ``user:V``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name in ("os", "os_entropy", "urandom"):
        return OsEntropy()
    if name in ("time", "system_time"):
        return SystemTime(resolution_us=int(arg) if arg else 1)
    if name == "constant":
        return Constant(value=int(arg))
    if name in ("range", "bounded_range"):
        lo, hi = (int(p) for p in arg.split(","))
        return BoundedRange(lo=lo, hi=hi)
    if name in ("user", "user_provided"):
        return UserProvided(value=int(arg))
    raise ValueError(f"unknown seed source: {text!r}")


def _os_entropy_word() -> int:
    try:
        raw = os.urandom(8)
    except (OSError, NotImplementedError) as exc:
        raise OsEntropyUnavailable(str(exc)) from exc
    return int.from_bytes(raw, "little")


def seed_from_source(source: SeedSource) -> int:
    """Draw one concrete 64-bit seed from a source.

    SystemTime returns the current clock in microseconds truncated to the
    source's resolution; a failure to read OS entropy raises
    OsEntropyUnavailable rather than falling back to anything weaker.
    """
    if isinstance(source, Constant):
        return source.value & _MASK64
    if isinstance(source, UserProvided):
        return source.value & _MASK64
    if isinstance(source, SystemTime):
        now_us = time.time_ns() // 1000
        return (now_us - now_us % source.resolution_us) & _MASK64
    if isinstance(source, BoundedRange):
        span = source.hi - source.lo
        return (source.lo + _os_entropy_word() % span) & _MASK64
    if isinstance(source, OsEntropy):
        return _os_entropy_word()
    raise TypeError(f"not a SeedSource: {source!r}")
