"""Checks of the ten consecutive steps of the hybrid chain from the
generator's output to Haar-random states."""

from __future__ import annotations

import math

import numpy as np

from arsim import mixing
from arsim.gaussian import RoundingParams, round_complex
from arsim.generator import gen_params
from arsim.quantum_core import MAX_DIM, ensemble_t_tensor, trace_distance_mixed
from arsim.verify import bounds
from arsim.verify.lemmas import complex_gaussian, verify_lemma
from arsim.verify.montecarlo import mean_stderr, run_chunks
from arsim.verify.reports import UPPER, HybridStepReport, decide

STEPS = ("P1P2", "P2P3", "P3P4", "P4P5", "P5P6", "P6P7", "P7P8", "P8P9", "P9P10", "P10P11")
IDENTITY_STEPS = ("P1P2", "P5P6", "P10P11")


def _sq_norm(v):
    return np.sum(v.real ** 2 + v.imag ** 2, axis=-1)


def sampler_component_distance(rp: RoundingParams) -> tuple[float, float, str]:
    """Bound on the statistical distance between one decoded real component
    and the exact rounded law.

    The decoder reads a fixed-point tail probability of ``64 + used`` bits and
    resolves its cell exactly, so the only error is quantisation: each of the
    ``B 2^m`` magnitude boundaries can misplace at most one dyadic interval of
    mass ``2^-(64 + used)``.  Returns ``(bound, 0, "exact")``.
    """
    used = min(rp.component_bits - 1 - 64, 64)
    return (rp.B << rp.m) * 2.0 ** -(64 + used), 0.0, "exact"


def _report(step, params, estimate, stderr, bound, method, trials, seed, **details):
    verdict = "pass" if method == "identity" else decide(estimate, stderr, bound, UPPER)
    return HybridStepReport(step, params, float(estimate), float(stderr), float(bound), method,
                            verdict, int(trials), mixing.seed_hex(seed), details)


def _conditional_rounded(rng, size, N, rp):
    """Rounded Gaussian vectors conditioned on ``||v|| >= sqrt N / 2`` (rejection)."""
    out = np.empty((0, N), complex)
    while out.shape[0] < size:
        v = round_complex(complex_gaussian(rng, 2 * (size - out.shape[0]) + 16, N), rp)
        out = np.concatenate([out, v[_sq_norm(v) >= N / 4]])
    return out[:size]


def hybrid_step_check(step: str, params: dict, trials: int = 1_000_000, seed=None,
                      threads: int = 1) -> HybridStepReport:
    if step not in STEPS:
        raise KeyError(f"unknown hybrid step {step!r}; expected one of {', '.join(STEPS)}")
    n = int(params["n"])
    lam = int(params.get("lambda", params.get("lam")))
    t = int(params.get("t", 1))
    gp = gen_params(n, lam)
    seed = mixing.fresh_seed() if seed is None else mixing.parse_seed(seed)
    p = {"n": n, "lambda": lam, "t": t}
    bound = bounds.hybrid_bounds(n, lam, t)[step]
    N, rp = gp.N, gp.rounding

    if step in IDENTITY_STEPS:
        return _report(step, p, 0.0, 0.0, 0.0, "identity", 0, seed)

    if step == "P2P3":
        comp, comp_se, method = sampler_component_distance(rp)
        draws = N * lam
        return _report(step, p, 2 * draws * comp, 2 * draws * comp_se, bound,
                       "exact" if method == "exact" else "monte_carlo", 0, seed,
                       per_component_distance=comp, sampler_draws=draws)

    if step == "P3P4":
        def chunk(rng, size, _):
            v = round_complex(complex_gaussian(rng, size, N), rp)
            return int(np.count_nonzero(_sq_norm(v) < N / 4))

        short = sum(run_chunks(chunk, trials, seed, (step, n, lam), threads))
        q = short / trials
        q_se = math.sqrt(max(q, 1 / trials) * (1 - q) / trials)
        if N > lam:
            est, se = q, q_se
        else:
            est, se = q ** lam, lam * max(q, q_se) ** (lam - 1) * q_se
        return _report(step, p, est, se, bound, "monte_carlo", trials, seed,
                       single_candidate_short=q, branch="N>lambda" if N > lam else "N<=lambda")

    if step == "P4P5":
        # average of the exact conditional failure probability given v
        def chunk(rng, size, _):
            v = _conditional_rounded(rng, size, N, rp)
            pv = np.minimum(_sq_norm(v) / (gp.M ** 2 * N), 1.0)
            one = np.exp(gp.k * np.log1p(-pv))
            fail = -np.expm1(t * np.log1p(-one))
            return float(fail.sum()), float(np.sum(fail * fail))

        parts = run_chunks(chunk, trials, seed, (step, n, lam, t), threads)
        est, se = mean_stderr(sum(a for a, _ in parts), sum(b for _, b in parts), trials)
        return _report(step, p, est, se, bound, "monte_carlo", trials, seed)

    if step in ("P6P7", "P8P9", "P9P10"):
        lemma = {"P6P7": "cond_coord", "P8P9": "not_in_layer", "P9P10": "cond2_coord"}[step]
        r = verify_lemma(lemma, {"n": n, "lambda": lam}, trials, seed, threads)
        return _report(step, p, r.estimate, r.stderr, bound, "monte_carlo", trials, seed,
                       lemma=lemma, lemma_method=r.method, lemma_bound=r.bound,
                       condition_hits=r.details.get("condition_hits"))

    # P7P8: exact trace distance between rounded and unrounded normalised
    # ensembles, over a sample from the doubly conditioned Gaussian law
    if N ** t > MAX_DIM:
        raise ValueError(f"N**t = {N ** t} exceeds the dense cap {MAX_DIM}")
    size = min(trials, int(params.get("ensemble", 2000)))
    rng = mixing.numpy_rng(seed, step, n, lam, t)
    kept = np.empty((0, N), complex)
    while kept.shape[0] < size:
        v = complex_gaussian(rng, 4 * size, N)
        ok = (_sq_norm(round_complex(v, rp)) >= N / 4) & np.all(np.abs(v) <= gp.B, axis=1)
        kept = np.concatenate([kept, v[ok]])
    v = kept[:size]
    r = round_complex(v, rp)
    w = np.full(size, 1.0 / size)
    vh = v / np.linalg.norm(v, axis=1, keepdims=True)
    rh = r / np.linalg.norm(r, axis=1, keepdims=True)
    td = trace_distance_mixed(ensemble_t_tensor(rh, w, t), ensemble_t_tensor(vh, w, t),
                              validate=False)
    worst = float(np.min(np.abs(np.sum(vh.conj() * rh, axis=1))))
    return _report(step, p, td, 0.0, bound, "exact", size, seed, ensemble_size=size,
                   min_overlap=worst, overlap_floor=1 - 36 * gp.eps ** 2)
