"""Default parameter grid for running every check in one pass."""

from __future__ import annotations

from arsim import mixing
from arsim.verify.distance import DISTANCE_IDS, two_point_scenario, verify_distance_lemma
from arsim.verify.hybrid import STEPS, hybrid_step_check
from arsim.verify.lemmas import verify_lemma

COROLLARIES = ("balanced", "rounded_long", "cond_coord", "cond2_coord", "not_in_layer")
GRID_N = (1, 2, 3)
GRID_LAMBDA = (4, 8, 12)
LONG_EPS = (0.2, 0.05, 0.01)
BVS_GRID = ((0.05, 60), (0.1, 50), (0.25, 20), (0.5, 8), (1.0, 1))


def lemma_grid(trials: int):
    """Yield ``(lemma_id, params, trials)`` for the default suite."""
    for n in (1, 2, 3, 4):
        yield "gaussian_long", {"n": n}, trials
    for n in range(1, 11):
        for lam in (3, 8, 16, 30):
            yield "coord_bounded", {"n": n, "lambda": lam}, 0
    for lemma in COROLLARIES:
        for n in GRID_N:
            for lam in GRID_LAMBDA:
                yield lemma, {"n": n, "lambda": lam}, trials
    for n in range(1, 7):
        for lam in (4, 8, 12, 20):
            yield "layer", {"n": n, "lambda": lam}, 0
    for n in range(1, 7):
        for eps in LONG_EPS:
            yield "long_vectors", {"n": n, "eps": eps}, 10_000
    for p, k in BVS_GRID:
        yield "bvs_claim", {"p": p, "k": k}, trials


def run_suite(trials: int = 1_000_000, seed=None, threads: int = 1, t_max: int = 3,
              hybrid_params=({"n": 1, "lambda": 12, "t": 2},)) -> list:
    """Every lemma on the default grid, the distance lemmas on two-point
    ensembles, and the hybrid steps at ``hybrid_params``."""
    seed = mixing.fresh_seed() if seed is None else mixing.parse_seed(seed)
    reports = [verify_lemma(lemma, params, tr, seed, threads)
               for lemma, params, tr in lemma_grid(trials)]
    for lemma in DISTANCE_IDS:
        for n in (1, 2):
            for t in range(1, t_max + 1):
                reports.append(verify_distance_lemma(lemma, two_point_scenario(lemma, n, seed), t, seed))
    for params in hybrid_params:
        reports.extend(hybrid_step_check(step, params, trials, seed, threads) for step in STEPS)
    return reports
