"""End-to-end estimate of the t-copy trace distance between generator output
and Haar-random states."""

from __future__ import annotations

import time

import numpy as np

from arsim import mixing
from arsim.generator import gen_params, generate_batch
from arsim.oracles import ThreefryPackets
from arsim.quantum_core import MAX_DIM, haar_moment, trace_distance_mixed
from arsim.verify.bounds import theorem_bound
from arsim.verify.montecarlo import fsum_arrays, run_chunks
from arsim.verify.reports import UPPER, LemmaReport, decide

MIN_RUNS = 100_000


def _copy_products(states: np.ndarray) -> np.ndarray:
    """Row-wise ``psi_1 (x) ... (x) psi_t`` for states of shape (runs, t, N)."""
    out = states[:, 0]
    for j in range(1, states.shape[1]):
        out = (out[:, :, None] * states[:, j, None, :]).reshape(out.shape[0], -1)
    return out


def e2e_trace_distance(n: int, lam: int, t: int, runs: int = 1_000_000, seed=None,
                       threads: int = 1, min_runs: int = MIN_RUNS) -> LemmaReport:
    """Average ``(x)_j |psi_j><psi_j|`` over ``runs`` fresh oracles with ``t``
    executions each (failures included as ``|0><0|``), then compare with the
    Haar moment.

    The error bar is the Frobenius norm of the entrywise standard errors of
    the averaged matrix, a conservative proxy for its spectral perturbation.
    """
    params = gen_params(n, lam)
    N = params.N
    dim = N ** t
    if dim > MAX_DIM:
        raise ValueError(f"N**t = {dim} exceeds the dense cap {MAX_DIM}")
    if runs < min_runs:
        raise ValueError(f"need at least {min_runs} runs, got {runs}")
    seed = mixing.fresh_seed() if seed is None else mixing.parse_seed(seed)
    start = time.perf_counter()

    def chunk(rng, size, index):
        keys = mixing.derive_keys(mixing.derive_seed(seed, "e2e", "oracle", index),
                                  np.arange(size))
        batch = generate_batch(params, ThreefryPackets(keys, n, params.r), t, rng)
        targets = batch.targets()
        failed = np.zeros(N, complex)
        failed[0] = 1.0
        states = np.where(batch.success[:, :, None], targets[:, None, :], failed)
        psi = _copy_products(states)
        mags = np.abs(psi) ** 2
        return (psi.T @ psi.conj(), mags.T @ mags, int(np.count_nonzero(~batch.success)),
                int(np.count_nonzero(batch.candidate == 0)))

    parts = run_chunks(chunk, runs, seed, ("e2e", n, lam, t), threads)
    rho = fsum_arrays(p[0] for p in parts) / runs
    second = fsum_arrays(p[1] for p in parts) / runs
    failures = sum(p[2] for p in parts)
    no_candidate = sum(p[3] for p in parts)
    rho = 0.5 * (rho + rho.conj().T)
    se = np.sqrt(np.maximum(second - np.abs(rho) ** 2, 0.0) / runs)
    err = float(np.linalg.norm(se))
    td = trace_distance_mixed(rho, haar_moment(n, t), validate=False)
    bound = theorem_bound(t, lam)
    return LemmaReport("e2e", {"n": n, "lambda": lam, "t": t, "runs": runs}, td, err, bound,
                       UPPER, decide(td, err, bound, UPPER), runs, mixing.seed_hex(seed), "monte_carlo",
                       {"failure_rate": failures / (runs * t),
                        "no_candidate_rate": no_candidate / runs,
                        "elapsed_s": time.perf_counter() - start})
