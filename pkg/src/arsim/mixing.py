"""Counter-based keyed mixing: Threefry-4x64-20 evaluated on numpy arrays.

Every random bit in the package is a deterministic function of a 256-bit key
and a 256-bit counter, so results never depend on evaluation order or on how
work is split across threads.  The block function is the Threefry-4x64 cipher
with 20 rounds as published with the Random123 library.

Counter layout used throughout::

    word 0: block index within a stream
    word 1: stream index (oracle input x, run index, chunk index, ...)
    word 2: domain tag (see the ``DOMAIN_*`` constants)
    word 3: reserved, zero
"""

from __future__ import annotations

import hashlib
import secrets

import numpy as np

_MASK64 = (1 << 64) - 1
_C240 = np.uint64(0x1BD11BDAA9FC1A22)
_ROTATIONS = ((14, 16), (52, 57), (23, 40), (5, 37), (25, 33), (46, 12), (58, 22), (32, 32))

DOMAIN_ORACLE = 1
DOMAIN_PRF = 2
DOMAIN_STREAM = 3
DOMAIN_DERIVE = 4

BLOCK_BITS = 256


def _rotl(x: np.ndarray, r: int) -> np.ndarray:
    return (x << np.uint64(r)) | (x >> np.uint64(64 - r))


def threefry4x64(key, counter) -> np.ndarray:
    """Threefry-4x64-20 block function.

    ``key`` and ``counter`` are uint64 arrays whose last axis has length 4;
    leading axes broadcast against each other.  Returns the 4-word output
    blocks with the broadcast shape.
    """
    key = np.asarray(key, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    shape = np.broadcast_shapes(key.shape, counter.shape)
    if shape[-1] != 4:
        raise ValueError("key and counter need a trailing axis of length 4")
    k = [np.broadcast_to(key[..., i], shape[:-1]) for i in range(4)]
    ks = k + [_C240 ^ k[0] ^ k[1] ^ k[2] ^ k[3]]
    x = [np.broadcast_to(counter[..., i], shape[:-1]) + ks[i] for i in range(4)]
    with np.errstate(over="ignore"):
        for rnd in range(20):
            r0, r1 = _ROTATIONS[rnd % 8]
            if rnd % 2 == 0:
                x[0] = x[0] + x[1]
                x[1] = _rotl(x[1], r0) ^ x[0]
                x[2] = x[2] + x[3]
                x[3] = _rotl(x[3], r1) ^ x[2]
            else:
                x[0] = x[0] + x[3]
                x[3] = _rotl(x[3], r0) ^ x[0]
                x[2] = x[2] + x[1]
                x[1] = _rotl(x[1], r1) ^ x[2]
            if rnd % 4 == 3:
                s = rnd // 4 + 1
                x[0] = x[0] + ks[s % 5]
                x[1] = x[1] + ks[(s + 1) % 5]
                x[2] = x[2] + ks[(s + 2) % 5]
                x[3] = x[3] + ks[(s + 3) % 5] + np.uint64(s)
    return np.stack(x, axis=-1)


def seed_to_words(seed) -> np.ndarray:
    """Convert a 256-bit seed (int, bytes or hex string) to 4 uint64 words.

    Word 0 holds the most significant 64 bits, matching the hex rendering.
    """
    value = parse_seed(seed)
    return np.array([(value >> (64 * (3 - i))) & _MASK64 for i in range(4)], dtype=np.uint64)


def words_to_seed(words) -> int:
    words = np.asarray(words, dtype=np.uint64)
    value = 0
    for w in words.tolist():
        value = (value << 64) | int(w)
    return value


def parse_seed(seed) -> int:
    if isinstance(seed, (bytes, bytearray)):
        if len(seed) != 32:
            raise ValueError("byte seeds must be exactly 32 bytes")
        return int.from_bytes(seed, "big")
    if isinstance(seed, str):
        text = seed.lower().removeprefix("0x")
        if not text or len(text) > 64:
            raise ValueError(f"seed {seed!r} is not a hex string of at most 64 digits")
        return int(text, 16)
    if isinstance(seed, (int, np.integer)):
        value = int(seed)
        if not 0 <= value < 1 << 256:
            raise ValueError("integer seeds must lie in [0, 2**256)")
        return value
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


def seed_hex(seed) -> str:
    return f"{parse_seed(seed):064x}"


def fresh_seed() -> int:
    return secrets.randbits(256)


def derive_seed(seed, *labels) -> int:
    """Child seed from a parent seed and a tuple of labels (BLAKE2b-256)."""
    h = hashlib.blake2b(digest_size=32, person=b"arsim-derive")
    h.update(parse_seed(seed).to_bytes(32, "big"))
    for label in labels:
        h.update(repr(label).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "big")


def derive_keys(seed, stream_indices, domain: int = DOMAIN_DERIVE) -> np.ndarray:
    """One 256-bit child key per stream index, vectorised; shape (len, 4)."""
    idx = np.asarray(stream_indices, dtype=np.uint64)
    counter = np.zeros(idx.shape + (4,), dtype=np.uint64)
    counter[..., 1] = idx
    counter[..., 2] = domain
    return threefry4x64(seed_to_words(seed), counter)


def numpy_rng(seed, *labels) -> np.random.Generator:
    """numpy Generator on a Philox stream keyed by a derived child seed."""
    child = derive_seed(seed, *labels)
    key = [child & _MASK64, (child >> 64) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key))


def stream_words(key, stream, domain: int, start_block: int, n_blocks: int) -> np.ndarray:
    """Consecutive output blocks of one stream flattened to uint64 words.

    ``key`` has shape (..., 4) and ``stream`` broadcasts against its leading
    axes; the result has shape (..., 4 * n_blocks) with words in bit order
    (word 0 carries the first 64 bits, most significant bit first).
    """
    key = np.asarray(key, dtype=np.uint64)
    stream = np.asarray(stream, dtype=np.uint64)
    lead = np.broadcast_shapes(key.shape[:-1], stream.shape)
    counter = np.zeros(lead + (n_blocks, 4), dtype=np.uint64)
    counter[..., 0] = np.arange(start_block, start_block + n_blocks, dtype=np.uint64)
    counter[..., 1] = stream[..., None]
    counter[..., 2] = domain
    out = threefry4x64(key[..., None, :], counter)
    return out.reshape(lead + (4 * n_blocks,))


def extract_field(words: np.ndarray, offset: int, width: int) -> np.ndarray:
    """Read ``width`` (<= 64) bits starting at bit ``offset`` of each row.

    Bits are numbered MSB-first across the words on the last axis.
    """
    if not 0 < width <= 64:
        raise ValueError("field width must be in 1..64")
    k, s = divmod(offset, 64)
    if (offset + width - 1) // 64 >= words.shape[-1]:
        raise ValueError("field runs past the end of the available words")
    hi = words[..., k]
    if s:
        val = hi << np.uint64(s)
        if k + 1 < words.shape[-1]:
            val = val | (words[..., k + 1] >> np.uint64(64 - s))
    else:
        val = hi
    return val >> np.uint64(64 - width)


def bits_to_array(words: np.ndarray, nbits: int) -> np.ndarray:
    """Unpack the first ``nbits`` bits of each row into a uint8 0/1 array."""
    as_bytes = words.astype(">u8").view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1)[..., :nbits]


def array_to_words(bits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`bits_to_array`, zero-padding to whole words."""
    bits = np.asarray(bits, dtype=np.uint8)
    pad = (-bits.shape[-1]) % 64
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1)
    return packed.view(">u8").astype(np.uint64)
