"""Closed-form probabilities and the stated bounds they are compared with."""

from __future__ import annotations

import math

from arsim.gaussian import chi2_interval


def tail_cut(n: int, lam: int) -> int:
    """``ceil(2 sqrt(n + lam))`` computed in integers."""
    return math.isqrt(4 * (n + lam) - 1) + 1


def theorem_bound(t: int, lam: int) -> float:
    """``(t+8) e^-lam + (5 sqrt t + lam + 1) 2^-lam + 2 (0.8)^lam``."""
    if t < 1 or lam < 5:
        raise ValueError("theorem_bound needs t >= 1 and lambda >= 5")
    return ((t + 8) * math.exp(-lam) + (5 * math.sqrt(t) + lam + 1) * 2.0 ** -lam
            + 2 * 0.8 ** lam)


def coord_bound_probability_exact(n: int, B: float) -> float:
    """Probability that some entry of a complex standard Gaussian ``2^n``-vector
    exceeds ``B`` in modulus: ``1 - (1 - e^{-B^2/2})^N``."""
    if B <= 0:
        raise ValueError("B must be positive")
    tail = math.exp(-B * B / 2.0)
    return -math.expm1((1 << n) * math.log1p(-tail))


def coord_bound_claim(lam: int) -> float:
    return math.exp(-lam)


def _layer_radii(n: int, lam: int) -> tuple[float, float, float]:
    if lam < 4:
        raise ValueError("the layer statement needs lambda >= 4")
    N = 1 << n
    eps = 2.0 ** (-n - lam)
    return eps, (0.5 - eps) ** 2 * N, N / 4.0


def layer_probability_exact(n: int, lam: int) -> float:
    """Gaussian mass of the shell ``(1/2 - eps) sqrt N <= ||u|| < sqrt N / 2``."""
    _, lo, hi = _layer_radii(n, lam)
    return chi2_interval(2 << n, lo, hi)


def _log_factorial(N: int) -> float:
    return math.log(math.factorial(N)) if N <= 32 else math.lgamma(N + 1)


def layer_volume_log(n: int, lam: int) -> float:
    """Log of ``pi^N N^N / N! * ((1/2)^{2N} - (1/2 - eps)^{2N})``."""
    N = 1 << n
    eps = 2.0 ** (-n - lam)
    shell = -2 * N * math.log(2.0) + math.log(-math.expm1(2 * N * math.log1p(-2 * eps)))
    return N * math.log(math.pi) + N * math.log(N) - _log_factorial(N) + shell


def layer_intermediate_bound(n: int, lam: int) -> float:
    """``e^{-(39/20 - eps) N} Vol(L)``."""
    N = 1 << n
    eps = 2.0 ** (-n - lam)
    return math.exp(-(39 / 20 - eps) * N + layer_volume_log(n, lam))


def layer_final_bound(n: int, lam: int) -> float:
    """``2^-lam 6^-N``."""
    return 2.0 ** -lam * 6.0 ** -(1 << n)


def not_in_layer_bound(n: int, lam: int) -> float:
    return 4 * layer_final_bound(n, lam)


def balanced_bound(n: int, lam: int) -> float:
    """Lower bound ``1 - (e^{-N/4} + e^{-lam})``."""
    return 1.0 - (math.exp(-(1 << n) / 4.0) + math.exp(-lam))


def gaussian_long_bound(m: int, eps: float) -> float:
    return 1.0 - math.exp(-eps * eps * m / 4.0)


def conditional_coord_bound(lam: int) -> float:
    return 4 * math.exp(-lam)


def long_vectors_bound(eps: float) -> float:
    return 1.0 - 18 * eps * eps


def trace_diameter_bound(eps: float, t: int) -> float:
    return math.sqrt(max(0.0, 1.0 - (1.0 - eps) ** (2 * t)))


def angular_bound(eps: float, t: int) -> float:
    return math.sqrt(2 * t * eps)


def hybrid_bounds(n: int, lam: int, t: int) -> dict[str, float]:
    N = 1 << n
    return {
        "P1P2": 0.0,
        "P2P3": lam * 2.0 ** -lam,
        "P3P4": 2 * 0.78 ** lam,
        "P4P5": t * math.exp(-lam),
        "P5P6": 0.0,
        "P6P7": 4 * math.exp(-lam),
        "P7P8": 6 * math.sqrt(2) * math.sqrt(t) / N * 2.0 ** -lam,
        "P8P9": not_in_layer_bound(n, lam),
        "P9P10": 4 * math.exp(-lam),
        "P10P11": 0.0,
    }
