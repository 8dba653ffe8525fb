"""Random-function sources: simulated random oracles, m-wise independent
polynomial families and a toy PRF.

Each source maps an ``n``-bit input ``x`` (an integer in ``[0, 2**n)``) to a
bit string.  Besides the per-input evaluators, the ``*Packets`` classes give
vectorised access to one fixed-width packet of the output for every input
and for a whole batch of independent keys at once, which is how the
generator consumes them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from arsim import mixing

# ---------------------------------------------------------------------------
# GF(2^w) arithmetic.  Polynomials over GF(2) are Python ints, bit i being the
# coefficient of x^i.


def _clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _polymod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a and a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _polygcd(a: int, b: int) -> int:
    while b:
        a, b = b, _polymod(a, b)
    return a


def is_irreducible(f: int) -> bool:
    """Ben-Or test: ``f`` is irreducible iff ``gcd(f, x^(2^i) - x) = 1`` for ``i <= deg/2``."""
    d = f.bit_length() - 1
    if d < 1:
        return False
    if d == 1:
        return True
    power = 2  # x
    for _ in range(d // 2):
        power = _polymod(_clmul(power, power), f)
        if _polygcd(f, power ^ 2) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def irreducible_poly(width: int) -> int:
    """Lexicographically smallest irreducible polynomial of degree ``width``."""
    if not 1 <= width <= 64:
        raise ValueError("field width must be in 1..64")
    top = 1 << width
    for low in range(1, top, 2):
        if is_irreducible(top | low):
            return top | low
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


def gf_mul(a: int, b: int, width: int) -> int:
    """Product in GF(2^width) for the field fixed by :func:`irreducible_poly`."""
    return _polymod(_clmul(a, b), irreducible_poly(width))


def gf_mul_small(a: np.ndarray, x: int, width: int) -> np.ndarray:
    """Vectorised ``a * x`` in GF(2^width); the loop runs over the bits of ``x``."""
    red = np.uint64(irreducible_poly(width) & ((1 << width) - 1))
    mask = np.uint64((1 << width) - 1)
    top = np.uint64(width - 1)
    acc = np.zeros_like(a)
    for bit in reversed(range(max(x.bit_length(), 1))):
        carry = (acc >> top) & np.uint64(1)
        acc = ((acc << np.uint64(1)) & mask) ^ (carry * red)
        if (x >> bit) & 1:
            acc ^= a
    return acc


def _horner(coeffs: np.ndarray, x: int, width: int) -> np.ndarray:
    """Evaluate polynomials with coefficients on the last axis (lowest degree first)."""
    acc = coeffs[..., -1].copy()
    for j in range(coeffs.shape[-1] - 2, -1, -1):
        acc = gf_mul_small(acc, x, width) ^ coeffs[..., j]
    return acc


# ---------------------------------------------------------------------------
# m-wise independent family


@dataclass(frozen=True)
class MWiseKey:
    """Coefficients of a degree ``m - 1`` polynomial over GF(2^width).

    The evaluation embeds ``x`` as a field element and keeps the low ``p``
    bits of the value, so outputs at any ``m`` distinct inputs are
    independent and uniform on ``p``-bit strings.
    """

    n: int
    p: int
    m: int
    width: int
    coefficients: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "p": self.p, "m": self.m, "width": self.width,
                           "coefficients": [f"{c:x}" for c in self.coefficients]})

    @classmethod
    def from_json(cls, text: str) -> "MWiseKey":
        d = json.loads(text)
        return cls(d["n"], d["p"], d["m"], d["width"],
                   tuple(int(c, 16) for c in d["coefficients"]))


def mwise_keygen(n: int, p: int, m: int, rng: np.random.Generator) -> MWiseKey:
    if not (1 <= p <= 64 and 0 <= n <= 64 and m >= 1):
        raise ValueError("need 0 <= n <= 64, 1 <= p <= 64 and m >= 1")
    width = max(n, p, 1)
    coeffs = rng.integers(0, 1 << width, size=m, dtype=np.uint64)
    return MWiseKey(n, p, m, width, tuple(int(c) for c in coeffs))


def mwise_eval(key: MWiseKey, x: int) -> int:
    """``p``-bit output at input ``x``, as an integer."""
    if not 0 <= x < 1 << key.n:
        raise ValueError(f"input {x} is not an {key.n}-bit string")
    acc = 0
    for c in reversed(key.coefficients):
        acc = gf_mul(acc, x, key.width) ^ c
    return acc & ((1 << key.p) - 1)


def mwise_independence_degree(t: int, lam: int, n: int) -> int:
    """Independence needed by the t-design construction: ``2 t lam 2^n``."""
    return 2 * t * lam * (1 << n)


@dataclass(frozen=True)
class TDesignKey:
    """Independent 64-bit m-wise lanes; lane ``j`` supplies output bits ``[64j, 64j + 64)``."""

    n: int
    lam: int
    t: int
    m: int
    output_bits: int
    coefficients: np.ndarray  # (lanes, m) uint64

    @property
    def lanes(self) -> int:
        return self.coefficients.shape[0]

    def lane(self, j: int) -> MWiseKey:
        return MWiseKey(self.n, 64, self.m, 64, tuple(int(c) for c in self.coefficients[j]))

    def eval(self, x: int) -> np.ndarray:
        words = _horner(self.coefficients, x, 64)
        return mixing.bits_to_array(words, self.output_bits)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "lam": self.lam, "t": self.t, "m": self.m,
                           "output_bits": self.output_bits,
                           "lanes": [[f"{c:016x}" for c in row] for row in self.coefficients.tolist()]})

    @classmethod
    def from_json(cls, text: str) -> "TDesignKey":
        d = json.loads(text)
        coeffs = np.array([[int(c, 16) for c in row] for row in d["lanes"]], dtype=np.uint64)
        return cls(d["n"], d["lam"], d["t"], d["m"], d["output_bits"], coeffs)


# ---------------------------------------------------------------------------
# Random oracle and toy PRF


@dataclass(frozen=True)
class OracleSpec:
    """A lazily evaluated random function ``{0,1}^n -> {0,1}^(packets * packet_bits)``."""

    seed: int
    n: int
    packet_bits: int
    packets: int

    def __post_init__(self):
        object.__setattr__(self, "seed", mixing.parse_seed(self.seed))

    @property
    def output_bits(self) -> int:
        return self.packet_bits * self.packets

    def to_json(self) -> str:
        return json.dumps({"seed": mixing.seed_hex(self.seed), "n": self.n,
                           "packet_bits": self.packet_bits, "packets": self.packets})

    @classmethod
    def from_json(cls, text: str) -> "OracleSpec":
        d = json.loads(text)
        return cls(int(d["seed"], 16), d["n"], d["packet_bits"], d["packets"])


def _check_input(x: int, n: int) -> int:
    if not 0 <= int(x) < 1 << n:
        raise ValueError(f"input {x} is not an {n}-bit string")
    return int(x)


def _stream_bits(key_words, x: int, domain: int, start: int, nbits: int) -> np.ndarray:
    first = start // mixing.BLOCK_BITS
    last = (start + nbits - 1) // mixing.BLOCK_BITS
    words = mixing.stream_words(key_words, x, domain, first, last - first + 1)
    offset = start - first * mixing.BLOCK_BITS
    return mixing.bits_to_array(words, offset + nbits)[offset:]


def oracle_eval(spec: OracleSpec, x: int) -> np.ndarray:
    """Full output of the oracle at ``x`` as a uint8 0/1 array."""
    x = _check_input(x, spec.n)
    return _stream_bits(mixing.seed_to_words(spec.seed), x, mixing.DOMAIN_ORACLE, 0, spec.output_bits)


def oracle_packet(spec: OracleSpec, x: int, i: int) -> np.ndarray:
    """Bits ``[(i-1) r, i r)`` of the oracle output at ``x`` (``i`` is 1-based)."""
    x = _check_input(x, spec.n)
    if not 1 <= i <= spec.packets:
        raise ValueError(f"packet index {i} outside 1..{spec.packets}")
    return _stream_bits(mixing.seed_to_words(spec.seed), x, mixing.DOMAIN_ORACLE,
                        (i - 1) * spec.packet_bits, spec.packet_bits)


@dataclass(frozen=True)
class PrfKey:
    """Key of the toy PRF: Threefry keyed by 256 secret bits, outputs ``output_bits`` bits."""

    key: int
    n: int
    output_bits: int

    def __post_init__(self):
        object.__setattr__(self, "key", mixing.parse_seed(self.key))

    def to_hex(self) -> str:
        return mixing.seed_hex(self.key)


def prf_eval(key: PrfKey, x: int) -> np.ndarray:
    x = _check_input(x, key.n)
    return _stream_bits(mixing.seed_to_words(key.key), x, mixing.DOMAIN_PRF, 0, key.output_bits)


# ---------------------------------------------------------------------------
# Batched packet access


class ThreefryPackets:
    """Packets of a batch of Threefry-keyed functions (random oracles or PRFs)."""

    def __init__(self, keys: np.ndarray, n: int, packet_bits: int, domain: int = mixing.DOMAIN_ORACLE):
        self.keys = np.atleast_2d(np.asarray(keys, dtype=np.uint64))
        self.n = n
        self.packet_bits = packet_bits
        self.domain = domain

    @classmethod
    def from_spec(cls, spec: OracleSpec) -> "ThreefryPackets":
        return cls(mixing.seed_to_words(spec.seed)[None], spec.n, spec.packet_bits)

    @classmethod
    def from_prf(cls, key: PrfKey, packet_bits: int) -> "ThreefryPackets":
        return cls(mixing.seed_to_words(key.key)[None], key.n, packet_bits, mixing.DOMAIN_PRF)

    def __len__(self) -> int:
        return self.keys.shape[0]

    def packet_words(self, i: int, rows=None) -> tuple[np.ndarray, int]:
        """Words of packet ``i`` for every input: shape (rows, 2**n, W), plus bit offset."""
        keys = self.keys if rows is None else self.keys[rows]
        start = (i - 1) * self.packet_bits
        first = start // mixing.BLOCK_BITS
        last = (start + self.packet_bits - 1) // mixing.BLOCK_BITS
        xs = np.arange(1 << self.n, dtype=np.uint64)
        words = mixing.stream_words(keys[:, None, :], xs[None, :], self.domain, first, last - first + 1)
        return words, start - first * mixing.BLOCK_BITS


class MWisePackets:
    """Packets of a batch of t-design keys; only the lanes a packet touches are evaluated."""

    def __init__(self, coefficients: np.ndarray, n: int, packet_bits: int):
        self.coefficients = np.asarray(coefficients, dtype=np.uint64)
        if self.coefficients.ndim == 2:
            self.coefficients = self.coefficients[None]
        self.n = n
        self.packet_bits = packet_bits

    @classmethod
    def from_key(cls, key: TDesignKey, packet_bits: int) -> "MWisePackets":
        return cls(key.coefficients[None], key.n, packet_bits)

    def __len__(self) -> int:
        return self.coefficients.shape[0]

    def packet_words(self, i: int, rows=None) -> tuple[np.ndarray, int]:
        coeffs = self.coefficients if rows is None else self.coefficients[rows]
        start = (i - 1) * self.packet_bits
        first = start // 64
        last = (start + self.packet_bits - 1) // 64
        lanes = coeffs[:, first:last + 1, :]
        words = np.stack([_horner(lanes, x, 64) for x in range(1 << self.n)], axis=1)
        return words, start - first * 64
