"""Chunked, counter-seeded Monte Carlo.

Work is cut into fixed-size chunks; chunk ``i`` draws from its own generator
derived from ``(seed, labels, i)``.  Results are combined in chunk order, so
estimates are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from arsim import mixing

CHUNK = 1 << 16


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(fn, total: int, seed, labels: tuple, threads: int = 1, chunk: int = CHUNK) -> list:
    """``[fn(rng_i, size_i, i) for each chunk i]`` evaluated on ``threads`` workers."""
    sizes = chunk_sizes(total, chunk)

    def work(i):
        return fn(mixing.numpy_rng(seed, *labels, i), sizes[i], i)

    if threads <= 1 or len(sizes) <= 1:
        return [work(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(len(sizes))))


def fsum_arrays(parts) -> np.ndarray:
    """Compensated (Neumaier) elementwise sum of arrays, in the given order."""
    total = None
    comp = None
    for x in parts:
        x = np.asarray(x)
        if total is None:
            total = x.astype(np.result_type(x, np.float64)).copy()
            comp = np.zeros_like(total)
            continue
        t = total + x
        big = np.abs(total) >= np.abs(x) if not np.iscomplexobj(total) else None
        if big is None:
            comp += _neumaier_complex(total, x, t)
        else:
            comp += np.where(big, (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def _neumaier_complex(a, b, t):
    def part(ar, br, tr):
        return np.where(np.abs(ar) >= np.abs(br), (ar - tr) + br, (br - tr) + ar)
    return part(a.real, b.real, t.real) + 1j * part(a.imag, b.imag, t.imag)


def binomial_stderr(successes: int, trials: int) -> float:
    """Binomial standard error; an empty or full count is treated as one event.

    With zero observed events the plug-in variance vanishes, which would let
    any bound pass.  Flooring the rate at ``1/trials`` keeps an honest
    resolution limit of roughly ``3/trials`` at the 3-sigma threshold.
    """
    if trials <= 0:
        return math.inf
    p = min(max(successes, 1), trials - 1 if trials > 1 else 1) / trials
    return math.sqrt(p * (1.0 - p) / trials)


def mean_stderr(total: float, total_sq: float, count: int) -> tuple[float, float]:
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)
