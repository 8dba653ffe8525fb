"""Per-statement checks of the Gaussian concentration facts and the
rejection-sampling claim.

Each check returns a :class:`LemmaReport`.  Event probabilities use chunked
Monte Carlo; conditional statements resample until the conditioning event
holds and report how many samples did.  Probabilities with a closed form are
evaluated exactly.
"""

from __future__ import annotations

import math

import numpy as np

from arsim import mixing
from arsim.gaussian import RoundingParams, chi2_cdf, chi2_interval, round_complex
from arsim.rejection import first_success, success_probs
from arsim.verify import bounds
from arsim.verify.montecarlo import binomial_stderr, mean_stderr, run_chunks
from arsim.verify.reports import FAIL, INFORMATIONAL, LOWER, UPPER, LemmaReport, decide

LEMMA_IDS = ("gaussian_long", "coord_bounded", "balanced", "rounded_long", "cond_coord",
             "cond2_coord", "layer", "not_in_layer", "long_vectors", "bvs_claim")

MIN_HITS = 1000
RARE_EVENT = 1e-5
DEFAULT_TRIALS = 1_000_000


class InsufficientSamples(ValueError):
    pass


def complex_gaussian(rng: np.random.Generator, size: int, N: int) -> np.ndarray:
    x = rng.standard_normal((size, N, 2))
    return x[..., 0] + 1j * x[..., 1]


def _sq_norm(v: np.ndarray) -> np.ndarray:
    return np.sum(v.real ** 2 + v.imag ** 2, axis=-1)


def _norm_params(params: dict) -> dict:
    p = dict(params)
    if "lam" in p:
        p["lambda"] = p.pop("lam")
    return p


def _require(params: dict, *names):
    missing = [k for k in names if k not in params]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")


def _setting(params: dict, min_lambda: int = 1):
    _require(params, "n", "lambda")
    n, lam = int(params["n"]), int(params["lambda"])
    if n < 1:
        raise ValueError("n must be at least 1")
    if lam < min_lambda:
        raise ValueError(f"this statement needs lambda >= {min_lambda}")
    B = int(params.get("B", bounds.tail_cut(n, lam)))
    if B * B < 4 * (n + lam):
        raise ValueError("the statement needs B >= 2 sqrt(n + lambda)")
    return n, lam, B


def _count(fn, trials, seed, labels, threads):
    parts = run_chunks(fn, trials, seed, labels, threads)
    return tuple(sum(p[i] for p in parts) for i in range(len(parts[0])))


def _report(lemma_id, params, estimate, stderr, bound, kind, trials, seed, method="monte_carlo",
            **details) -> LemmaReport:
    verdict = decide(estimate, stderr, bound, kind)
    return LemmaReport(lemma_id, params, float(estimate), float(stderr), float(bound), kind,
                       verdict, int(trials), mixing.seed_hex(seed), method, details)


# ---------------------------------------------------------------------------


def _gaussian_long(params, trials, seed, threads):
    if "m" not in params:
        _require(params, "n")
        params["m"] = 2 << int(params["n"])
    m = int(params["m"])
    eps = float(params.setdefault("eps", 7 / 8))
    if m < 1 or eps <= 0:
        raise ValueError("need m >= 1 and eps > 0")
    level = (1 - eps) * m

    def chunk(rng, size, _):
        u = rng.standard_normal((size, m))
        return (int(np.count_nonzero(np.sum(u * u, axis=1) >= level)),)

    (hits,) = _count(chunk, trials, seed, ("gaussian_long", m, eps), threads)
    est = hits / trials
    exact = 1 - chi2_cdf(m, level) if m % 2 == 0 else None
    return _report("gaussian_long", params, est, binomial_stderr(hits, trials),
                   bounds.gaussian_long_bound(m, eps), LOWER, trials, seed, exact=exact)


def _coord_bounded(params, trials, seed, threads):
    n, lam, B = _setting(params)
    params["B"] = B
    exact = bounds.coord_bound_probability_exact(n, B)
    details = {}
    if trials:
        N = 1 << n

        def chunk(rng, size, _):
            v = complex_gaussian(rng, size, N)
            return (int(np.count_nonzero(np.any(np.abs(v) > B, axis=1))),)

        (hits,) = _count(chunk, trials, seed, ("coord_bounded", n, B), threads)
        details = {"mc_estimate": hits / trials, "mc_stderr": binomial_stderr(hits, trials)}
    return _report("coord_bounded", params, exact, 0.0, bounds.coord_bound_claim(lam), UPPER,
                   trials, seed, method="exact", **details)


def _balanced(params, trials, seed, threads):
    n, lam, B = _setting(params)
    params["B"] = B
    N = 1 << n

    def chunk(rng, size, _):
        v = complex_gaussian(rng, size, N)
        ok = (_sq_norm(v) >= N / 4) & np.all(np.abs(v) <= B, axis=1)
        return (int(np.count_nonzero(ok)),)

    (hits,) = _count(chunk, trials, seed, ("balanced", n, lam, B), threads)
    return _report("balanced", params, hits / trials, binomial_stderr(hits, trials),
                   bounds.balanced_bound(n, lam), LOWER, trials, seed)


def _rounding(n, lam, B, params):
    m = int(params.setdefault("m", n + lam))
    return RoundingParams(m, B)


def _rounded_long(params, trials, seed, threads):
    n, lam, B = _setting(params)
    params["B"] = B
    rp = _rounding(n, lam, B, params)
    N = 1 << n

    def chunk(rng, size, _):
        v = round_complex(complex_gaussian(rng, size, N), rp)
        return (int(np.count_nonzero(_sq_norm(v) >= N / 4)),)

    (hits,) = _count(chunk, trials, seed, ("rounded_long", n, lam, B, rp.m), threads)
    return _report("rounded_long", params, hits / trials, binomial_stderr(hits, trials),
                   bounds.balanced_bound(n, lam), LOWER, trials, seed)


def _conditional(lemma_id, params, trials, seed, threads, condition):
    n, lam, B = _setting(params, min_lambda=3 if lemma_id == "cond_coord" else 1)
    params["B"] = B
    rp = _rounding(n, lam, B, params)
    N = 1 << n

    def chunk(rng, size, _):
        v = complex_gaussian(rng, size, N)
        base = round_complex(v, rp) if condition == "rounded" else v
        cond = _sq_norm(base) >= N / 4
        event = cond & np.any(np.abs(v) > B, axis=1)
        return int(np.count_nonzero(cond)), int(np.count_nonzero(event))

    hits, events = _count(chunk, trials, seed, (lemma_id, n, lam, B, rp.m), threads)
    if hits < MIN_HITS:
        raise InsufficientSamples(f"{lemma_id}: only {hits} conditioned samples (< {MIN_HITS})")
    details = {"condition_hits": hits, "events": events, "rejection_estimate": events / hits,
               "rejection_stderr": binomial_stderr(events, hits)}
    union = bounds.coord_bound_probability_exact(n, B)
    if union >= RARE_EVENT:
        return _report(lemma_id, params, events / hits, binomial_stderr(events, hits),
                       bounds.conditional_coord_bound(lam), UPPER, trials, seed, **details)
    # too rare for sampling: P(E | C) <= P(E) / P(C), exact numerator
    cond = hits / trials
    cond_se = binomial_stderr(hits, trials)
    return _report(lemma_id, params, union / cond, union * cond_se / cond ** 2,
                   bounds.conditional_coord_bound(lam), UPPER, trials, seed,
                   method="exact_ratio", union_probability=union, condition_probability=cond,
                   **details)


def _layer(params, trials, seed, threads):
    n, lam, _ = _setting(params, min_lambda=4)
    exact = bounds.layer_probability_exact(n, lam)
    inter = bounds.layer_intermediate_bound(n, lam)
    final = bounds.layer_final_bound(n, lam)
    details = {"intermediate_bound": inter, "intermediate_holds": exact <= inter,
               "final_bound": final, "final_bound_holds": exact <= final,
               "note": ("the comparison with the final bound 2^-lambda 6^-N is informational; "
                        "the intermediate bound e^{-(39/20-eps)N} Vol(L) is enforced")}
    if trials:
        N = 1 << n
        eps = 2.0 ** (-n - lam)
        lo, hi = (0.5 - eps) ** 2 * N, N / 4

        def chunk(rng, size, _):
            r2 = _sq_norm(complex_gaussian(rng, size, N))
            return (int(np.count_nonzero((r2 >= lo) & (r2 < hi))),)

        (hits,) = _count(chunk, trials, seed, ("layer", n, lam), threads)
        details.update(mc_estimate=hits / trials, mc_stderr=binomial_stderr(hits, trials))
    verdict = INFORMATIONAL if exact <= inter else FAIL
    return LemmaReport("layer", params, exact, 0.0, inter, UPPER, verdict, int(trials),
                       mixing.seed_hex(seed), "exact", details)


def _first_crossing(d, lo, hi, target_sq, rp, iterations=60):
    """Smallest radius on ``[lo, hi]`` where ``||R(r d)||^2 >= target_sq`` (bisection).

    The rounded norm is non-decreasing in ``r`` while every entry stays within
    the tail cut, which holds on the whole bracket.
    """
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        up = _sq_norm(round_complex(mid[:, None] * d, rp)) >= target_sq
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return hi


def _not_in_layer(params, trials, seed, threads):
    """Pr[||u|| < sqrt N / 2 | ||R(u)|| >= sqrt N / 2 and every |u_i| <= B].

    Numerator: writing ``u = r d`` with ``d`` uniform on the sphere and
    ``r^2`` chi-square, the joint event is, for each ``d``, an interval of
    radii whose chi-square mass is computed exactly; only ``d`` is sampled.
    Denominator: plain Monte Carlo of the conditioning event.
    """
    n, lam, B = _setting(params, min_lambda=4)
    params["B"] = B
    rp = _rounding(n, lam, B, params)
    N = 1 << n
    half = math.sqrt(N) / 2
    shift = math.sqrt(2 * N) * rp.eps  # ||R(u) - u|| <= sqrt(2N) eps inside the cut
    directions = int(params.get("directions", min(trials, 1 << 18)))

    def radial(rng, size, _):
        z = complex_gaussian(rng, size, N)
        d = z / np.sqrt(_sq_norm(z))[:, None]
        top = np.minimum(half, B / np.max(np.abs(d), axis=1))
        lo = np.full(size, max(0.0, half - shift))
        lo = np.minimum(lo, top)
        reach = _sq_norm(round_complex(top[:, None] * d, rp)) >= N / 4
        cross = _first_crossing(d, lo, top.copy(), N / 4, rp)
        w = np.where(reach & (cross < top), chi2_interval(2 * N, cross ** 2, top ** 2), 0.0)
        return float(w.sum()), float(np.sum(w * w))

    def plain(rng, size, _):
        v = complex_gaussian(rng, size, N)
        cond = (_sq_norm(round_complex(v, rp)) >= N / 4) & np.all(np.abs(v) <= B, axis=1)
        event = cond & (_sq_norm(v) < N / 4)
        return int(np.count_nonzero(cond)), int(np.count_nonzero(event))

    s1, s2 = _count(radial, directions, seed, ("not_in_layer", "radial", n, lam, B, rp.m), threads)
    joint, joint_se = mean_stderr(s1, s2, directions)
    hits, events = _count(plain, trials, seed, ("not_in_layer", "plain", n, lam, B, rp.m), threads)
    if hits < MIN_HITS:
        raise InsufficientSamples(f"not_in_layer: only {hits} conditioned samples (< {MIN_HITS})")
    cond = hits / trials
    cond_se = binomial_stderr(hits, trials)
    est = joint / cond
    se = est * math.hypot(joint_se / joint if joint else 0.0, cond_se / cond)
    return _report("not_in_layer", params, est, se, bounds.not_in_layer_bound(n, lam), UPPER,
                   trials, seed, condition_hits=hits, directions=directions,
                   joint_probability=joint, joint_stderr=joint_se, condition_probability=cond,
                   rejection_estimate=events / hits, rejection_events=events,
                   rejection_stderr=binomial_stderr(events, hits),
                   layer_probability=bounds.layer_probability_exact(n, lam))


def long_vector_pairs(rng: np.random.Generator, size: int, N: int, eps: float):
    """Pairs meeting the hypotheses ``||u|| >= sqrt N / 2`` and ``|u_i - v_i| <= eps``.

    Half of the ``u`` sit exactly on the norm boundary.  Perturbations have
    full modulus ``eps`` per entry and are either random-phase, orthogonal to
    ``u`` entrywise, or pointing towards the origin, the last two being the
    directions that rotate or shrink ``u`` the most.
    """
    u = complex_gaussian(rng, size, N)
    norms = np.sqrt(_sq_norm(u))
    floor = math.sqrt(N) / 2 * (1 + 1e-12)
    boundary = rng.random(size) < 0.5
    scale = np.where(boundary | (norms < floor), floor / norms, 1.0)
    u = u * scale[:, None]
    phase_u = u / np.maximum(np.abs(u), 1e-300)
    kind = rng.integers(0, 3, size)
    random_phase = np.exp(2j * np.pi * rng.random((size, N)))
    delta = np.where((kind == 0)[:, None], random_phase,
                     np.where((kind == 1)[:, None], 1j * phase_u, -phase_u))
    # shave one ulp-scale margin so the hypothesis holds after rounding
    v = u + eps * (1 - 1e-12) * delta
    return u, v


def _long_vectors(params, trials, seed, threads):
    _require(params, "n", "eps")
    n, eps = int(params["n"]), float(params["eps"])
    if not 0 <= eps <= 0.2:
        raise ValueError("the statement needs 0 <= eps <= 1/5")
    N = 1 << n
    bound = bounds.long_vectors_bound(eps)

    def chunk(rng, size, _):
        u, v = long_vector_pairs(rng, size, N, eps)
        ok = (_sq_norm(u) >= N / 4) & np.all(np.abs(u - v) <= eps, axis=1)
        overlap = np.abs(np.sum(u.conj() * v, axis=1)) / np.sqrt(_sq_norm(u) * _sq_norm(v))
        overlap = overlap[ok]
        return (float(overlap.min(initial=np.inf)), int(np.count_nonzero(overlap < bound)),
                int(np.count_nonzero(ok)))

    parts = run_chunks(chunk, trials, seed, ("long_vectors", n, eps), threads)
    worst = min(p[0] for p in parts)
    violations = sum(p[1] for p in parts)
    valid = sum(p[2] for p in parts)
    return _report("long_vectors", params, worst, 0.0, bound, LOWER, trials, seed,
                   method="exhaustive", violations=violations, valid_pairs=valid)


def _bvs_claim(params, trials, seed, threads):
    _require(params, "p", "k")
    p, k = float(params["p"]), int(params["k"])
    n = int(params.setdefault("n", 1))
    if not 0 < p <= 1 or k < 1:
        raise ValueError("need 0 < p <= 1 and k >= 1")
    N = 1 << n
    M = 1.0
    rng = mixing.numpy_rng(seed, "bvs_claim", "vector", n, p)
    v = math.sqrt(p) * M * np.exp(2j * np.pi * rng.random(N))
    p_exact = float(success_probs(v, M))

    def chunk(rng, size, _):
        single = first_success(p_exact, 1, rng, size=size)
        amplified = first_success(p_exact, k, rng, size=size)
        return int(np.count_nonzero(single)), int(np.count_nonzero(amplified == 0))

    succ, fails = _count(chunk, trials, seed, ("bvs_claim", n, p, k), threads)
    single_rate = succ / trials
    single_se = math.sqrt(p_exact * (1 - p_exact) / trials) if p_exact < 1 else 0.0
    single_ok = abs(single_rate - p_exact) <= 3 * single_se + 1e-15
    report = _report("bvs_claim", params, fails / trials, binomial_stderr(fails, trials),
                     math.exp(-k * p_exact), UPPER, trials, seed,
                     success_probability=p_exact, single_success_rate=single_rate,
                     single_stderr=single_se, single_within_3sigma=single_ok,
                     exact_failure=(1 - p_exact) ** k)
    if not single_ok:
        report.verdict = FAIL
    return report


_DISPATCH = {
    "gaussian_long": _gaussian_long,
    "coord_bounded": _coord_bounded,
    "balanced": _balanced,
    "rounded_long": _rounded_long,
    "cond_coord": lambda p, tr, s, th: _conditional("cond_coord", p, tr, s, th, "rounded"),
    "cond2_coord": lambda p, tr, s, th: _conditional("cond2_coord", p, tr, s, th, "plain"),
    "layer": _layer,
    "not_in_layer": _not_in_layer,
    "long_vectors": _long_vectors,
    "bvs_claim": _bvs_claim,
}


def verify_lemma(lemma_id: str, params: dict, trials: int = DEFAULT_TRIALS, seed=None,
                 threads: int = 1) -> LemmaReport:
    """Check one statement; ``seed`` defaults to fresh entropy and is echoed in the report."""
    if lemma_id not in _DISPATCH:
        raise KeyError(f"unknown lemma id {lemma_id!r}; expected one of {', '.join(LEMMA_IDS)}")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    seed = mixing.fresh_seed() if seed is None else mixing.parse_seed(seed)
    return _DISPATCH[lemma_id](_norm_params(params), int(trials), seed, threads)
