import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from arsim.verify import (LEMMA_IDS, STEPS, InsufficientSamples, coord_bound_probability_exact,
                          e2e_trace_distance, hybrid_step_check, layer_final_bound,
                          layer_intermediate_bound, layer_probability_exact, tail_cut,
                          theorem_bound, to_csv, two_point_scenario, verify_distance_lemma,
                          verify_lemma)
from arsim.verify.bounds import hybrid_bounds, layer_volume_log
from arsim.verify.distance import statistical_distance
from arsim.verify.hybrid import sampler_component_distance
from arsim.verify.montecarlo import binomial_stderr, chunk_sizes, fsum_arrays, run_chunks
from arsim.verify.reports import FAIL, INFORMATIONAL, PASS, decide
from arsim.gaussian import RoundingParams

mpmath.mp.dps = 50


def mp_theorem(t, lam):
    return float((t + 8) * mpmath.e ** -lam + (5 * mpmath.sqrt(t) + lam + 1) * mpmath.mpf(2) ** -lam
                 + 2 * mpmath.mpf("0.8") ** lam)


def mp_layer(n, lam):
    N = 2 ** n
    eps = mpmath.mpf(2) ** (-n - lam)
    lo, hi = (mpmath.mpf(1) / 2 - eps) ** 2 * N, mpmath.mpf(N) / 4
    return float(mpmath.gammainc(N, lo / 2, hi / 2, regularized=True))


# frozen from the mpmath oracle above
THEOREM_1_20 = 0.023083244174746102
THEOREM_1_12 = 0.14188878263317994
LAYER_1_4 = 0.005620207790455938
COORD_1_5 = 7.453292456213477e-06


def test_theorem_bound_values():
    assert theorem_bound(1, 20) == pytest.approx(THEOREM_1_20, rel=1e-7)
    assert theorem_bound(1, 12) == pytest.approx(THEOREM_1_12, rel=1e-7)
    for t, lam in ((1, 5), (2, 20), (3, 40), (7, 64)):
        assert theorem_bound(t, lam) == pytest.approx(mp_theorem(t, lam), rel=1e-13)
    with pytest.raises(ValueError):
        theorem_bound(1, 4)


@pytest.mark.parametrize("t", [1, 2, 5])
def test_theorem_bound_decreasing(t):
    values = [theorem_bound(t, lam) for lam in range(5, 65)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_coord_exact_values():
    assert coord_bound_probability_exact(1, 5) == pytest.approx(COORD_1_5, rel=1e-12)
    assert coord_bound_probability_exact(1, 5) == pytest.approx(
        float(1 - (1 - mpmath.e ** -12.5) ** 2), rel=1e-12)
    assert coord_bound_probability_exact(3, 60) == 0.0


def test_layer_exact_values():
    assert layer_probability_exact(1, 4) == pytest.approx(LAYER_1_4, rel=1e-12)
    # closed form for four real degrees of freedom
    F = lambda x: 1 - math.exp(-x / 2) * (1 + x / 2)
    assert layer_probability_exact(1, 4) == pytest.approx(F(0.5) - F(2 * (0.5 - 2 ** -5) ** 2), rel=1e-10)
    for n, lam in ((2, 8), (3, 12), (6, 20)):
        assert layer_probability_exact(n, lam) == pytest.approx(mp_layer(n, lam), rel=1e-9)


def test_layer_volume_against_mpmath():
    for n, lam in ((1, 4), (5, 10), (6, 20)):
        N = 2 ** n
        eps = mpmath.mpf(2) ** (-n - lam)
        vol = mpmath.pi ** N * mpmath.mpf(N) ** N / mpmath.factorial(N) * (
            mpmath.mpf(1) / 4 ** N - (mpmath.mpf(1) / 2 - eps) ** (2 * N))
        assert layer_volume_log(n, lam) == pytest.approx(float(mpmath.log(vol)), rel=1e-10)


def test_layer_final_bound_fails_at_two_dimensions():
    assert layer_final_bound(1, 4) == pytest.approx(1 / 576)
    assert layer_probability_exact(1, 4) > layer_final_bound(1, 4)
    assert layer_probability_exact(1, 4) <= layer_intermediate_bound(1, 4)


def test_exact_values_agree_with_sampling():
    r = verify_lemma("coord_bounded", {"n": 1, "lambda": 5, "B": 5}, 10_000_000, 1)
    assert abs(r.details["mc_estimate"] - r.estimate) <= 4 * math.sqrt(r.estimate / 1e7)
    r = verify_lemma("layer", {"n": 1, "lambda": 4}, 10_000_000, 2)
    assert abs(r.details["mc_estimate"] - r.estimate) <= 4 * math.sqrt(r.estimate / 1e7)


def test_gaussian_long_exact_agrees():
    r = verify_lemma("gaussian_long", {"m": 32, "eps": 0.875}, 1_000_000, 3)
    assert r.verdict == PASS
    assert r.details["exact"] == pytest.approx(1 - float(
        mpmath.gammainc(16, 0, 2, regularized=True)), rel=1e-12)


def test_tail_cut():
    assert [tail_cut(1, lam) for lam in (3, 5, 8)] == [4, 5, 6]


def test_decide():
    assert decide(0.1, 0.01, 0.13, "upper") == PASS
    assert decide(0.1, 0.02, 0.13, "upper") == FAIL
    assert decide(0.9, 0.01, 0.87, "lower") == PASS
    with pytest.raises(ValueError):
        decide(0, 0, 0, "sideways")


def test_binomial_stderr_floor():
    assert binomial_stderr(0, 100) == pytest.approx(math.sqrt(0.01 * 0.99 / 100))
    assert binomial_stderr(100, 100) == binomial_stderr(99, 100)


def test_chunks_are_thread_independent():
    def fn(rng, size, i):
        return rng.random(size).sum(), i
    a = run_chunks(fn, 300_000, 5, ("x",), threads=1)
    b = run_chunks(fn, 300_000, 5, ("x",), threads=4)
    assert a == b and sum(chunk_sizes(300_000)) == 300_000


def test_compensated_sum():
    parts = [np.array([1e16, 1.0]), np.array([1.0, 1.0]), np.array([-1e16, 1.0])]
    assert np.array_equal(fsum_arrays(parts), [1.0, 3.0])


@pytest.mark.parametrize("lemma", LEMMA_IDS)
def test_every_lemma_reproducible(lemma):
    params = {"long_vectors": {"n": 2, "eps": 0.05}, "bvs_claim": {"p": 0.3, "k": 10},
              "gaussian_long": {"n": 2}}.get(lemma, {"n": 1, "lambda": 8})
    a = verify_lemma(lemma, dict(params), 70_000, 9)
    b = verify_lemma(lemma, dict(params), 70_000, a.seed, threads=2)
    assert a.to_dict() == b.to_dict()
    assert a.verdict in (PASS, INFORMATIONAL)


def test_lemma_errors():
    with pytest.raises(KeyError):
        verify_lemma("nope", {}, 10, 1)
    with pytest.raises(ValueError):
        verify_lemma("cond_coord", {"n": 1, "lambda": 2}, 10_000, 1)
    with pytest.raises(ValueError):
        verify_lemma("layer", {"n": 1, "lambda": 3}, 0, 1)
    with pytest.raises(ValueError):
        verify_lemma("long_vectors", {"n": 1, "eps": 0.3}, 10, 1)
    with pytest.raises(InsufficientSamples):
        verify_lemma("cond_coord", {"n": 1, "lambda": 8}, 100, 1)


def test_layer_report_is_informational_with_note():
    r = verify_lemma("layer", {"n": 1, "lambda": 4}, 0, 1)
    assert r.verdict == INFORMATIONAL
    assert r.details["intermediate_holds"] and not r.details["final_bound_holds"]


def test_not_in_layer_estimators_agree():
    # radial conditional estimator versus plain rejection
    r = verify_lemma("not_in_layer", {"n": 1, "lambda": 4}, 1_000_000, 2)
    d = r.details
    assert abs(r.estimate - d["rejection_estimate"]) <= 4 * math.hypot(r.stderr, d["rejection_stderr"])
    assert r.verdict == PASS
    # spec example expects roughly the layer mass over the conditioning probability
    assert r.estimate <= LAYER_1_4 / d["condition_probability"] * 1.05


def test_not_in_layer_fails_beyond_two_dimensions():
    r = verify_lemma("not_in_layer", {"n": 2, "lambda": 4}, 200_000, 2)
    assert r.verdict == FAIL
    assert r.estimate - 3 * r.stderr > r.bound
    assert r.details["rejection_estimate"] > r.bound


def test_long_vectors_hypotheses_all_met():
    r = verify_lemma("long_vectors", {"n": 3, "eps": 0.01}, 10_000, 4)
    assert r.details["valid_pairs"] == 10_000 and r.details["violations"] == 0
    assert r.estimate >= 0.9982


@given(st.integers(0, 2 ** 32), st.integers(1, 6), st.sampled_from([0.2, 0.1, 0.05, 0.01, 0.001]))
def test_long_vectors_property(seed, n, eps):
    from arsim.verify.lemmas import long_vector_pairs
    N = 1 << n
    u, v = long_vector_pairs(np.random.default_rng(seed), 200, N, eps)
    ok = (np.sum(np.abs(u) ** 2, axis=1) >= N / 4) & np.all(np.abs(u - v) <= eps, axis=1)
    overlap = np.abs(np.sum(u.conj() * v, axis=1)) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
    assert ok.all() and np.all(overlap >= 1 - 18 * eps * eps)


def test_sd_td_identical_distributions():
    states = np.eye(4)[:2].astype(complex)
    scenario = {"D1": (states, [0.3, 0.7]), "D2": (states, [0.3, 0.7])}
    r = verify_distance_lemma("sd_td", scenario, 2)
    assert r.estimate == pytest.approx(0, abs=1e-14) and r.bound == 0 and r.verdict == PASS


def test_statistical_distance_merges_phases():
    a = (np.array([[1, 0], [0, 1]], complex), [0.5, 0.5])
    b = (np.array([[1j, 0], [0, 1]], complex), [0.5, 0.5])
    assert statistical_distance(a, b) == pytest.approx(0)


def test_trace_diameter_example():
    r = verify_distance_lemma("trace_diameter", two_point_scenario("trace_diameter", 1, eps=0.01), 3)
    assert r.details["eps"] == pytest.approx(0.01, rel=1e-9)
    assert r.bound == pytest.approx(math.sqrt(1 - 0.99 ** 6), rel=1e-9)
    assert r.estimate <= r.bound


def test_angular_with_rounding():
    r = verify_distance_lemma("angular", two_point_scenario("angular", 1, m=7), 2)
    assert r.verdict == PASS
    assert r.estimate <= r.details["instantiated_bound"] == pytest.approx(math.sqrt(144) * 2 ** -7)


def test_distance_dimension_cap():
    with pytest.raises(ValueError):
        verify_distance_lemma("sd_td", two_point_scenario("sd_td", 4), 4)


def test_identity_steps():
    for step in ("P1P2", "P5P6", "P10P11"):
        r = hybrid_step_check(step, {"n": 1, "lambda": 12, "t": 2}, 10, 1)
        assert (r.estimate, r.bound, r.method, r.verdict) == (0, 0, "identity", PASS)


def test_hybrid_bounds_values():
    b = hybrid_bounds(1, 12, 2)
    assert b["P4P5"] == pytest.approx(2 * math.exp(-12))
    assert b["P7P8"] == pytest.approx(6 * math.sqrt(2) * math.sqrt(2) / 2 * 2 ** -12)
    assert b["P3P4"] == pytest.approx(2 * 0.78 ** 12)


@pytest.mark.parametrize("step", [s for s in STEPS if s not in ("P1P2", "P5P6", "P10P11")])
def test_hybrid_steps_pass(step):
    r = hybrid_step_check(step, {"n": 1, "lambda": 12, "t": 2}, 1_000_000, 3)
    assert r.verdict == PASS, r


def test_sampler_distance_small():
    est, se, method = sampler_component_distance(RoundingParams(6, 4))
    assert method == "exact" and se == 0 and est < 2.0 ** -6
    est, se, method = sampler_component_distance(RoundingParams(40, 8))
    assert method == "exact" and est == 8 * 2.0 ** 40 * 2.0 ** -(64 + 42) and est < 2.0 ** -40


def test_e2e_contract():
    with pytest.raises(ValueError):
        e2e_trace_distance(1, 12, 1, 1000, 1)
    with pytest.raises(ValueError):
        e2e_trace_distance(4, 12, 4, 100_000, 1)
    r = e2e_trace_distance(1, 12, 1, 100_000, 1)
    assert r.verdict == PASS and r.bound == pytest.approx(THEOREM_1_12, rel=1e-7)


def test_csv_projection():
    reports = [verify_lemma("layer", {"n": 1, "lambda": 4}, 0, 1),
               hybrid_step_check("P1P2", {"n": 1, "lambda": 12, "t": 1}, 0, 1)]
    lines = to_csv(reports).strip().splitlines()
    assert lines[0].startswith("id,params,estimate,stderr,bound")
    assert lines[1].startswith("layer,") and lines[2].startswith("P1P2,")
