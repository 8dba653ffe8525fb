"""Rounded Gaussian distribution: rounding map, exact pmf, bit-budgeted sampler.

The rounding map sends a real ``x`` to 0 when ``|x| > B`` and otherwise to the
multiple of ``eps = 2**-m`` of least magnitude that is at least ``|x|`` in
magnitude, keeping the sign of ``x``.  Complex numbers are rounded part-wise.

The sampler turns a fixed budget of ``r = 2 * (m + ceil(log2 B) + 64)`` random
bits into one complex sample, so a random function with ``r``-bit outputs
yields one vector entry per input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from arsim import mixing

GUARD_BITS = 64
BOUNDARY_MARGIN = 1e-13


@dataclass(frozen=True)
class RoundingParams:
    """Precision exponent ``m`` (``eps = 2**-m``) and integer tail cut ``B``."""

    m: int
    B: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"precision exponent m must be a positive integer, got {self.m}")
        if int(self.B) != self.B or self.B < 1:
            raise ValueError(f"tail cut B must be a positive integer, got {self.B}")

    @property
    def eps(self) -> float:
        return math.ldexp(1.0, -self.m)

    @property
    def component_bits(self) -> int:
        """Bits spent on one real component: sign, 64 high bits, the rest low."""
        return self.m + ceil_log2(self.B) + GUARD_BITS

    @property
    def sample_bits(self) -> int:
        """``r(eps, B)``: bits consumed by one complex sample."""
        return 2 * self.component_bits

    def grid(self) -> np.ndarray:
        """Every value a rounded real component can take, ascending."""
        k = np.arange(1, self.B * (1 << self.m) + 1, dtype=np.float64)
        pos = np.ldexp(k, -self.m)
        return np.concatenate([-pos[::-1], [0.0], pos])


def ceil_log2(x: int) -> int:
    return (int(x) - 1).bit_length()


def round_scalar(x, p: RoundingParams):
    """Round real value(s) onto the ``(eps, B)`` grid; arrays are mapped elementwise."""
    x = np.asarray(x, dtype=np.float64)
    mag = np.abs(x)
    up = np.ldexp(np.ceil(np.ldexp(mag, p.m)), -p.m)
    out = np.where(mag > p.B, 0.0, np.copysign(up, x))
    out = out + 0.0  # -0.0 -> 0.0
    return out if out.ndim else float(out)


def round_complex(z, p: RoundingParams):
    z = np.asarray(z, dtype=np.complex128)
    out = round_scalar(z.real, p) + 1j * np.asarray(round_scalar(z.imag, p))
    return out if np.ndim(out) else complex(out)


def _normal_sf(x):
    return special.ndtr(-np.asarray(x, dtype=np.float64))


def rounded_pmf(y, p: RoundingParams):
    """Probability that one rounded real component equals ``y``.

    Cell ``((k-1) eps, k eps]`` maps to ``k eps``; the tails beyond ``B``
    map to zero.  Survival functions are used so that tail cells keep full
    relative precision.
    """
    y = np.asarray(y, dtype=np.float64)
    scaled = np.ldexp(np.abs(y), p.m)
    k = np.rint(scaled)
    on_grid = (scaled == k) & (np.abs(y) <= p.B)
    upper = np.ldexp(k, -p.m)
    lower = np.ldexp(np.maximum(k - 1, 0), -p.m)
    cell = _normal_sf(lower) - _normal_sf(upper)
    zero_mass = 2.0 * _normal_sf(float(p.B))
    out = np.where(~on_grid, 0.0, np.where(k == 0, zero_mass, cell))
    return out if out.ndim else float(out)


# Wichura, Algorithm AS 241 (PPND16): relative accuracy about 1e-16.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, x):
    acc = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def normal_quantile(p):
    """Inverse standard normal CDF for ``p`` in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _poly(_A, r) / _poly(_B, r)
    tail = ~central
    if tail.any():
        pt = p[tail]
        r = np.sqrt(-np.log(np.minimum(pt, 1.0 - pt)))
        near = r <= 5.0
        x = np.empty_like(r)
        rn = r[near] - 1.6
        x[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = r[~near] - 5.0
        x[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(q[tail] < 0, -x, x)
    return out if out.ndim else float(out)


class RandomBitstream:
    """Deterministic bit source addressed by ``(seed, counter)``.

    Block ``counter`` of the stream is the Threefry output for the seed as key
    and ``counter`` in the block slot of the counter, giving 256 bits per
    block.  The stream keeps a bit position so consumers can draw exactly the
    number of bits they are budgeted.
    """

    def __init__(self, seed, position: int = 0):
        self.seed = mixing.parse_seed(seed)
        self._key = mixing.seed_to_words(self.seed)
        self.position = int(position)

    @property
    def counter(self) -> int:
        return self.position // mixing.BLOCK_BITS

    def __repr__(self):
        return f"RandomBitstream(seed=0x{self.seed:064x}, position={self.position})"

    def peek_words(self, nbits: int, position: int | None = None) -> tuple[np.ndarray, int]:
        """Words covering ``nbits`` bits from ``position``, with the bit offset into them."""
        start = self.position if position is None else position
        first = start // mixing.BLOCK_BITS
        last = (start + nbits - 1) // mixing.BLOCK_BITS
        words = mixing.stream_words(self._key, 0, mixing.DOMAIN_STREAM, first, last - first + 1)
        return words, start - first * mixing.BLOCK_BITS

    def read(self, nbits: int) -> np.ndarray:
        """Consume ``nbits`` bits, returned as a uint8 0/1 array."""
        words, offset = self.peek_words(nbits)
        self.position += nbits
        return mixing.bits_to_array(words, offset + nbits)[offset:]


def read_fields(words: np.ndarray, offsets, width: int) -> np.ndarray:
    """Vectorised bit-field read: ``width`` (<= 64) bits at ``offsets``.

    Bits are MSB-first across the last axis of ``words``.  A 1-D ``words``
    is one long stream read at every offset; otherwise ``offsets`` broadcasts
    against the leading axes, one offset per row.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    if words.ndim == 1:
        k = offsets // 64
        hi, lo = words[k], words[np.minimum(k + 1, words.size - 1)]
    else:
        lead = np.broadcast_shapes(words.shape[:-1], offsets.shape)
        words = np.broadcast_to(words, lead + words.shape[-1:])
        padded = np.concatenate([words, np.zeros(lead + (1,), np.uint64)], axis=-1)
        offsets = np.broadcast_to(offsets, lead)
        k = (offsets // 64)[..., None]
        hi = np.take_along_axis(padded, k, axis=-1)[..., 0]
        lo = np.take_along_axis(padded, k + 1, axis=-1)[..., 0]
    s = (offsets % 64).astype(np.uint64)
    joined = np.where(s == 0, hi, (hi << s) | (lo >> ((np.uint64(64) - s) % np.uint64(64))))
    return joined >> np.uint64(64 - width)


def _exact_cell(numerator: int, denominator_bits: int, k: int, p: RoundingParams) -> int:
    """Cell index ``k`` with ``(k-1) eps < |x| <= k eps`` where ``Phi_bar(|x|)``
    equals ``numerator / 2^denominator_bits / 2``, decided in 200-bit arithmetic."""
    with mpmath.workprec(200):
        half_tail = mpmath.ldexp(mpmath.mpf(numerator), -denominator_bits - 1)
        upper_tail = lambda cell: mpmath.erfc(mpmath.ldexp(cell, -p.m) / mpmath.sqrt(2)) / 2
        k = max(int(k), 1)
        while upper_tail(k) > half_tail:
            k += 1
        while k > 1 and upper_tail(k - 1) <= half_tail:
            k -= 1
    return k


def _decode_component(words, offsets, p: RoundingParams) -> np.ndarray:
    w = p.component_bits
    low_bits = w - 1 - GUARD_BITS
    sign = read_fields(words, offsets, 1)
    hi_int = read_fields(words, offsets + 1, 64)
    hi = hi_int.astype(np.float64)
    if low_bits:
        used = min(low_bits, 64)
        lo_int = read_fields(words, offsets + 1 + GUARD_BITS, used)
        tail = np.ldexp(hi, -64) + np.ldexp(lo_int.astype(np.float64) + 0.5, -64 - used)
    else:
        used = 0
        tail = np.ldexp(hi + 0.5, -64)
    # tail in (0, 1) is the two-sided tail mass beyond |x|
    mag = -normal_quantile(0.5 * tail)
    cell = np.ceil(np.ldexp(mag, p.m))
    # the double-precision path is accurate to a few ulps of max(|x|, 1); draws
    # that land closer than that to a cell boundary are resolved exactly
    slack = np.ldexp(BOUNDARY_MARGIN * np.maximum(mag, 1.0), p.m)
    near = (cell - np.ldexp(mag, p.m) <= slack) | (np.ldexp(mag, p.m) - (cell - 1) <= slack)
    if np.any(near):
        cell = np.array(cell, dtype=np.float64, ndmin=1)
        hi_flat = np.broadcast_to(hi_int, np.shape(mag)).reshape(-1)
        lo_flat = np.broadcast_to(lo_int, np.shape(mag)).reshape(-1) if used else None
        flat = cell.reshape(-1)
        for i in np.flatnonzero(near):
            numerator = 2 * int(hi_flat[i]) + 1
            if used:
                numerator = (int(hi_flat[i]) << (used + 1)) + 2 * int(lo_flat[i]) + 1
            flat[i] = _exact_cell(numerator, 64 + used + 1, int(flat[i]), p)
        cell = flat.reshape(np.shape(mag))
    out = np.where(cell > (p.B << p.m), 0.0, np.ldexp(cell, -p.m))
    return np.where(sign == 1, -out, out) + 0.0


def decode_samples(words: np.ndarray, offsets, p: RoundingParams,
                   component: str = "both") -> np.ndarray:
    """Complex samples from ``r``-bit packets starting at ``offsets`` of ``words``.

    Layout of one packet: real component then imaginary component, each as
    one sign bit, 64 high bits of a fixed-point tail probability, then the
    remaining low bits.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    re = _decode_component(words, offsets, p)
    if component == "real":
        return re
    im = _decode_component(words, offsets + p.component_bits, p)
    return re + 1j * im


def gsample(p: RoundingParams, bits: RandomBitstream) -> complex:
    """One rounded complex Gaussian sample, consuming exactly ``r(eps, B)`` bits."""
    return complex(gsample_many(p, bits, 1)[0])


def gsample_many(p: RoundingParams, bits: RandomBitstream, count: int,
                 chunk: int = 1 << 18, component: str = "both") -> np.ndarray:
    """``count`` consecutive samples; identical to ``count`` calls of :func:`gsample`.

    ``component="real"`` skips decoding the imaginary parts (the bits are
    still consumed), which is what goodness-of-fit runs need.
    """
    if component not in ("both", "real"):
        raise ValueError("component must be 'both' or 'real'")
    r = p.sample_bits
    out = np.empty(count, dtype=np.complex128 if component == "both" else np.float64)
    for lo in range(0, count, chunk):
        n = min(chunk, count - lo)
        words, offset = bits.peek_words(n * r)
        offsets = offset + r * np.arange(n, dtype=np.int64)
        out[lo:lo + n] = decode_samples(words, offsets, p, component)
        bits.position += n * r
    return out


def chi2_cdf(dof: int, x: float) -> float:
    """CDF of the chi-square law with an even number of degrees of freedom.

    Equals ``1 - exp(-x/2) * sum_{j < dof/2} (x/2)**j / j!``.  Whichever of
    the lower or upper Poisson sum is smaller is evaluated directly so that
    tiny probabilities keep relative precision.
    """
    if int(dof) != dof or dof <= 0 or dof % 2:
        raise ValueError(f"chi2_cdf needs an even positive dof, got {dof}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    half = x / 2.0
    k = dof // 2
    log_half = math.log(half)
    if half < k:
        # lower tail: P[Poisson(half) >= k]
        terms = []
        j = k
        log_term = -half + j * log_half - math.lgamma(j + 1)
        while True:
            terms.append(math.exp(log_term))
            j += 1
            log_term += log_half - math.log(j)
            if log_term < math.log(terms[0]) - 40 and j > half:
                break
        return math.fsum(terms)
    terms = [math.exp(-half + j * log_half - math.lgamma(j + 1)) for j in range(k)]
    return 1.0 - math.fsum(terms)


def chi2_logpdf(dof: int, x):
    x = np.asarray(x, dtype=np.float64)
    k = dof / 2.0
    return (k - 1) * np.log(x) - x / 2 - k * math.log(2.0) - math.lgamma(k)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def chi2_interval(dof: int, lo, hi):
    """``P[lo <= X < hi]`` for chi-square ``X``; accurate for thin intervals.

    Gauss-Legendre quadrature of the density, so the result keeps relative
    precision where a difference of two CDF values would cancel.  Intended
    for intervals narrow relative to the density's curvature scale.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    pts = mid[..., None] + half[..., None] * _GL_NODES
    dens = np.exp(chi2_logpdf(dof, np.maximum(pts, 1e-300)))
    out = half * (dens @ _GL_WEIGHTS)
    return out if out.ndim else float(out)
