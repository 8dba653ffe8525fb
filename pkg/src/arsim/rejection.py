"""Classical simulation of quantum rejection sampling towards ``v / ||v||``.

One attempt prepares the uniform superposition, loads ``v_x / M`` into an
ancilla amplitude and measures the ancilla, succeeding with probability
``||v||^2 / (M^2 N)`` and leaving the target state on success.  The
simulation draws that Bernoulli outcome exactly.  The amplified version
repeats attempts and stops at the first success; this is sampled as the
geometric index of the first success, which has the same law as running
the attempts one by one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from arsim.quantum_core import normalize

_BOUND_SLACK = 1e-12


@dataclass
class BvsOutcome:
    """``state`` is ``v / ||v||`` on success and basis vector 0 on failure."""

    success: bool
    state: np.ndarray
    trials: int


def _check_amplitudes(v, M: float) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0 or v.size & (v.size - 1):
        raise ValueError("v must be a vector whose length is a power of two")
    if M <= 0:
        raise ValueError("M must be positive")
    if np.max(np.abs(v)) > M * (1 + _BOUND_SLACK):
        raise ValueError(f"entry magnitude {np.max(np.abs(v)):.6g} exceeds M = {M:.6g}")
    return v


def qrs_success_prob(v, M: float) -> float:
    """Success probability ``||v||^2 / (M^2 N)`` of one attempt."""
    v = _check_amplitudes(v, M)
    return float(min(np.vdot(v, v).real / (M * M * v.size), 1.0))


def success_probs(vectors: np.ndarray, M: float) -> np.ndarray:
    """Row-wise :func:`qrs_success_prob` for a batch of vectors, shape (k, N)."""
    vectors = np.asarray(vectors)
    return np.minimum(np.sum(np.abs(vectors) ** 2, axis=-1) / (M * M * vectors.shape[-1]), 1.0)


def first_success(p, k: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Index of the first successful attempt among ``k``, or 0 if all ``k`` fail.

    ``p`` may be an array; zero probabilities never succeed.
    """
    p = np.asarray(p, dtype=np.float64)
    shape = np.broadcast_shapes(p.shape, () if size is None else tuple(np.atleast_1d(size)))
    safe = np.where(p > 0, p, 1.0)
    g = rng.geometric(np.broadcast_to(safe, shape))
    return np.where((p > 0) & (g <= k), g, 0)


def bvs_amplified(v, M: float, k: int, rng: np.random.Generator) -> BvsOutcome:
    """Up to ``k`` attempts with early exit; ``trials`` counts the attempts made."""
    if k < 1:
        raise ValueError("k must be at least 1")
    v = _check_amplitudes(v, M)
    p = qrs_success_prob(v, M)
    g = int(first_success(p, k, rng))
    if g:
        return BvsOutcome(True, normalize(v), g)
    failed = np.zeros(v.size, dtype=np.complex128)
    failed[0] = 1.0
    return BvsOutcome(False, failed, k)


def bvs(v, M: float, rng: np.random.Generator) -> BvsOutcome:
    """A single attempt."""
    return bvs_amplified(v, M, 1, rng)
