"""PRNG algorithms and the generator handle abstraction.

Four algorithms cover the families the audit engine needs to exercise:

* ``mt19937``   - the classic 624-word twisted GFSR, bit-exact against the
                  published reference (seeded with the standard Knuth
                  recurrence from the low 32 bits of the seed).
* ``philox``    - counter-based 4x32 generator, 10 rounds; output at any
                  counter is a pure function of (key, counter).
* ``weak_lcg``  - a textbook 64-bit LCG whose full state is its output;
                  kept as an attack-simulation fixture, never for real use.
* ``csprng_ctr``- AES-128-CTR keystream keyed from OS entropy, rekeyed
                  every 2**20 output words. Construction with any other
                  seed source is refused outright.

A handle is single-owner mutable state: transfer between threads is fine,
simultaneous use from two threads is not.
"""

from __future__ import annotations

import os
from enum import Enum

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import InsecureSeed, OsEntropyUnavailable
from .seeds import Constant, OsEntropy, SeedSource, seed_from_source

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF


class Algorithm(str, Enum):
    MT19937 = "mt19937"
    PHILOX = "philox"
    WEAK_LCG = "weak_lcg"
    CSPRNG_CTR = "csprng_ctr"


class SecurityClass(str, Enum):
    CRYPTOGRAPHIC = "cryptographic"
    STATISTICAL = "statistical"
    WEAK = "weak"


def classify(algorithm: Algorithm, seed_source: SeedSource) -> SecurityClass:
    """Security class is a pure function of (algorithm, seed provenance).

    Cryptographic requires both a CSPRNG construction and an OS-entropy
    key; a CSPRNG keyed from a guessable seed is weaker than a statistical
    generator, not stronger, so it classifies as weak.
    """
    if algorithm is Algorithm.CSPRNG_CTR:
        if isinstance(seed_source, OsEntropy):
            return SecurityClass.CRYPTOGRAPHIC
        return SecurityClass.WEAK
    if algorithm is Algorithm.WEAK_LCG:
        return SecurityClass.WEAK
    return SecurityClass.STATISTICAL


def raw_to_unit_interval(word: int) -> float:
    """Map a 64-bit word to [0, 1).

    Computed as (word >> 11) / 2**53, which is word / 2**64 rounded toward
    zero at double precision. Naive division returns exactly 1.0 for words
    within 2**11 of 2**64, breaking the half-open contract.
    """
    return (word >> 11) * (1.0 / 9007199254740992.0)


class GeneratorHandle:
    """Base for all generators: algorithm identity, seed provenance,
    security class, and a count of raw words emitted."""

    algorithm: Algorithm
    word_bits: int

    def __init__(self, seed_source: SeedSource):
        self.seed_source = seed_source
        self.security_class = classify(self.algorithm, seed_source)
        self.draws_emitted = 0

    def next_word(self) -> int:
        """Next raw word at the algorithm's native width."""
        raise NotImplementedError

    def next_u64(self) -> int:
        """Canonical 64-bit draw (32-bit algorithms consume two words,
        low word first)."""
        if self.word_bits == 64:
            return self.next_word()
        lo = self.next_word()
        hi = self.next_word()
        return (hi << 32) | lo

    def next_unit(self) -> float:
        return raw_to_unit_interval(self.next_u64())

    def reseed_from(self, source: SeedSource) -> None:
        """Re-key the generator in place from a fresh draw off ``source``."""
        raise NotImplementedError


class Mt19937(GeneratorHandle):
    """MT19937 with the standard seeding recurrence (Knuth multiplier
    1812433253); matches the published reference output bit-exactly."""

    algorithm = Algorithm.MT19937
    word_bits = 32

    N = 624
    M = 397
    MATRIX_A = 0x9908B0DF
    UPPER = 0x80000000
    LOWER = 0x7FFFFFFF

    def __init__(self, seed: int, seed_source: SeedSource | None = None):
        super().__init__(seed_source if seed_source is not None else Constant(seed))
        self._init_state(seed)

    def _init_state(self, seed: int) -> None:
        # The reference recurrence is defined on a 32-bit seed.
        self.seed = seed & _MASK64
        mt = [0] * self.N
        mt[0] = seed & _MASK32
        for i in range(1, self.N):
            mt[i] = (1812433253 * (mt[i - 1] ^ (mt[i - 1] >> 30)) + i) & _MASK32
        self._mt = mt
        self._index = self.N

    def _twist(self) -> None:
        mt = self._mt
        n, m = self.N, self.M
        upper, lower, matrix_a = self.UPPER, self.LOWER, self.MATRIX_A
        for kk in range(n):
            y = (mt[kk] & upper) | (mt[(kk + 1) % n] & lower)
            mt[kk] = mt[(kk + m) % n] ^ (y >> 1) ^ (matrix_a if y & 1 else 0)
        self._index = 0

    def next_word(self) -> int:
        if self._index >= self.N:
            self._twist()
        y = self._mt[self._index]
        self._index += 1
        y ^= y >> 11
        y ^= (y << 7) & 0x9D2C5680
        y ^= (y << 15) & 0xEFC60000
        y ^= y >> 18
        self.draws_emitted += 1
        return y

    def reseed_from(self, source: SeedSource) -> None:
        self.seed_source = source
        self.security_class = classify(self.algorithm, source)
        self._init_state(seed_from_source(source))


# Philox 4x32-10 round constants (multipliers and Weyl key increments).
PHILOX_M0 = 0xD2511F53
PHILOX_M1 = 0xCD9E8D57
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
PHILOX_ROUNDS = 10


def philox_block(key: tuple[int, int], block_index: int) -> tuple[int, int, int, int]:
    """Run the 10-round 4x32 bijection on counter block ``block_index``.

    Pure function: no state anywhere. Counter lanes are the little-endian
    32-bit limbs of the block index.
    """
    k0, k1 = key[0] & _MASK32, key[1] & _MASK32
    x0 = block_index & _MASK32
    x1 = (block_index >> 32) & _MASK32
    x2 = (block_index >> 64) & _MASK32
    x3 = (block_index >> 96) & _MASK32
    for _ in range(PHILOX_ROUNDS):
        p0 = PHILOX_M0 * x0
        p1 = PHILOX_M1 * x2
        x0, x1, x2, x3 = (
            ((p1 >> 32) ^ x1 ^ k0) & _MASK32,
            p1 & _MASK32,
            ((p0 >> 32) ^ x3 ^ k1) & _MASK32,
            p0 & _MASK32,
        )
        k0 = (k0 + PHILOX_W0) & _MASK32
        k1 = (k1 + PHILOX_W1) & _MASK32
    return x0, x1, x2, x3


def philox_word(key: tuple[int, int], counter: int) -> int:
    """64-bit output word at position ``counter``: lanes (0,1) of the
    block for even counters, lanes (2,3) for odd, low lane first."""
    x0, x1, x2, x3 = philox_block(key, counter >> 1)
    if counter & 1:
        return (x3 << 32) | x2
    return (x1 << 32) | x0


class Philox(GeneratorHandle):
    """Counter-based generator; random access via :func:`philox_word`."""

    algorithm = Algorithm.PHILOX
    word_bits = 64

    def __init__(self, seed: int, seed_source: SeedSource | None = None):
        super().__init__(seed_source if seed_source is not None else Constant(seed))
        self._key_from_seed(seed)

    def _key_from_seed(self, seed: int) -> None:
        self.seed = seed & _MASK64
        self.key = (seed & _MASK32, (seed >> 32) & _MASK32)
        self.counter = 0
        self._block: tuple[int, int, int, int] | None = None

    def next_word(self) -> int:
        if self.counter & 1 == 0 or self._block is None:
            self._block = philox_block(self.key, self.counter >> 1)
        x0, x1, x2, x3 = self._block
        if self.counter & 1:
            word = (x3 << 32) | x2
        else:
            word = (x1 << 32) | x0
        self.counter += 1
        self.draws_emitted += 1
        return word

    def word_at(self, counter: int) -> int:
        """Random access without touching the sequential state."""
        return philox_word(self.key, counter)

    def reseed_from(self, source: SeedSource) -> None:
        self.seed_source = source
        self.security_class = classify(self.algorithm, source)
        self._key_from_seed(seed_from_source(source))


# Knuth MMIX constants; emitting the full state makes each output reveal
# the generator, which is exactly the weakness the attack fixtures need.
LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407


class WeakLcg(GeneratorHandle):
    """64-bit LCG attack fixture; demonstrably weak by construction."""

    algorithm = Algorithm.WEAK_LCG
    word_bits = 64

    def __init__(self, seed: int, seed_source: SeedSource | None = None):
        super().__init__(seed_source if seed_source is not None else Constant(seed))
        self.seed = seed & _MASK64
        self._state = seed & _MASK64

    def next_word(self) -> int:
        self._state = (self._state * LCG_MULT + LCG_INC) & _MASK64
        self.draws_emitted += 1
        return self._state

    def reseed_from(self, source: SeedSource) -> None:
        self.seed_source = source
        self.security_class = classify(self.algorithm, source)
        seed = seed_from_source(source)
        self.seed = seed & _MASK64
        self._state = seed & _MASK64


CSPRNG_RESEED_INTERVAL = 1 << 20  # output words between rekeys
_ZERO_CHUNK = bytes(8192)


class CtrCsprng(GeneratorHandle):
    """AES-128-CTR keystream generator keyed from OS entropy.

    Refuses construction from any other seed source: silently degrading to
    a guessable key is the exact failure mode the policy layer exists to
    catch. The key and counter nonce are rekeyed from OS entropy every
    CSPRNG_RESEED_INTERVAL output words.
    """

    algorithm = Algorithm.CSPRNG_CTR
    word_bits = 64

    def __init__(self, seed_source: SeedSource | None = None):
        source = seed_source if seed_source is not None else OsEntropy()
        if not isinstance(source, OsEntropy):
            raise InsecureSeed(
                f"csprng_ctr requires an OS entropy seed, got {source.kind}"
            )
        super().__init__(source)
        self.seed = None
        self._rekey()

    def _rekey(self) -> None:
        try:
            key = os.urandom(16)
            nonce = os.urandom(16)
        except (OSError, NotImplementedError) as exc:
            raise OsEntropyUnavailable(str(exc)) from exc
        self._encryptor = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
        self._buf = b""
        self._pos = 0
        self._words_since_rekey = 0

    def next_word(self) -> int:
        if self._words_since_rekey >= CSPRNG_RESEED_INTERVAL:
            self._rekey()
        if self._pos >= len(self._buf):
            self._buf = self._encryptor.update(_ZERO_CHUNK)
            self._pos = 0
        word = int.from_bytes(self._buf[self._pos : self._pos + 8], "little")
        self._pos += 8
        self._words_since_rekey += 1
        self.draws_emitted += 1
        return word

    def reseed_from(self, source: SeedSource) -> None:
        if not isinstance(source, OsEntropy):
            raise InsecureSeed(
                f"csprng_ctr requires an OS entropy seed, got {source.kind}"
            )
        self.seed_source = source
        self.security_class = classify(self.algorithm, source)
        self._rekey()


_SEEDED_CLASSES = {
    Algorithm.MT19937: Mt19937,
    Algorithm.PHILOX: Philox,
    Algorithm.WEAK_LCG: WeakLcg,
}


def make_generator(
    algorithm: Algorithm | str,
    seed_source: SeedSource | None = None,
    seed: int | None = None,
) -> GeneratorHandle:
    """Construct a handle from provenance or from a concrete seed.

    ``seed`` wins when given (provenance defaults to Constant); otherwise a
    concrete seed is drawn from ``seed_source`` (default OS entropy). The
    CSPRNG accepts neither a concrete seed nor a non-entropy source.
    """
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.CSPRNG_CTR:
        if seed is not None:
            raise InsecureSeed("csprng_ctr does not accept a caller-chosen seed")
        return CtrCsprng(seed_source)
    cls = _SEEDED_CLASSES[algorithm]
    if seed is not None:
        return cls(seed, seed_source if seed_source is not None else Constant(seed))
    source = seed_source if seed_source is not None else OsEntropy()
    return cls(seed_from_source(source), source)


def export_raw(gen: GeneratorHandle, count: int, stream) -> None:
    """Write ``count`` 64-bit words as little-endian bytes, no header."""
    write = stream.write
    for _ in range(count):
        write(gen.next_u64().to_bytes(8, "little"))


def mt19937_next(handle: Mt19937) -> int:
    """Next 32-bit tempered word (thin functional alias)."""
    return handle.next_word()


def philox_next(handle: Philox) -> int:
    """Next 64-bit counter-mode word (thin functional alias)."""
    return handle.next_word()


def csprng_next(handle: CtrCsprng) -> int:
    """Next 64-bit keystream word (thin functional alias)."""
    return handle.next_word()
