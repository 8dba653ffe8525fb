"""Exact checks of the three trace-distance statements on finite ensembles.

A scenario is a dict.  ``sd_td`` and ``trace_diameter`` take two weighted
ensembles ``{"D1": (states, weights), "D2": (states, weights)}``; ``angular``
takes ``{"vectors": ..., "weights": ..., "phi": callable}`` where ``phi`` maps
an unnormalised vector to another.
"""

from __future__ import annotations

import math

import numpy as np

from arsim import mixing
from arsim.gaussian import RoundingParams, round_complex
from arsim.quantum_core import ensemble_t_tensor, trace_distance_mixed
from arsim.verify import bounds
from arsim.verify.reports import UPPER, LemmaReport, decide

DISTANCE_IDS = ("sd_td", "trace_diameter", "angular")


def _unit_rows(v) -> np.ndarray:
    v = np.atleast_2d(np.asarray(v, dtype=np.complex128))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def statistical_distance(d1, d2, tol: float = 1e-12) -> float:
    """Total variation between two finite ensembles; states equal up to a global
    phase count as the same point."""
    s1, w1 = _unit_rows(d1[0]), np.asarray(d1[1], float)
    s2, w2 = _unit_rows(d2[0]), np.asarray(d2[1], float)
    points = np.concatenate([s1, s2])
    weights = np.concatenate([w1, -w2])
    labels = -np.ones(len(points), dtype=int)
    for i in range(len(points)):
        if labels[i] >= 0:
            continue
        same = np.abs(np.abs(points.conj() @ points[i]) - 1.0) <= tol
        labels[same & (labels < 0)] = i
    diff = np.zeros(len(points))
    np.add.at(diff, labels, weights)
    return 0.5 * float(np.sum(np.abs(diff)))


def min_cross_overlap(s1, s2) -> float:
    return float(np.min(np.abs(_unit_rows(s1).conj() @ _unit_rows(s2).T)))


def _td(d1, d2, t) -> float:
    rho1 = ensemble_t_tensor(_unit_rows(d1[0]), d1[1], t)
    rho2 = ensemble_t_tensor(_unit_rows(d2[0]), d2[1], t)
    return trace_distance_mixed(rho1, rho2)


def verify_distance_lemma(lemma_id: str, scenario: dict, t: int, seed=0) -> LemmaReport:
    if lemma_id not in DISTANCE_IDS:
        raise KeyError(f"unknown distance lemma {lemma_id!r}")
    params = dict(scenario.get("params", {}), t=t)
    details = {}
    if lemma_id in ("sd_td", "trace_diameter"):
        d1, d2 = scenario["D1"], scenario["D2"]
        td = _td(d1, d2, t)
        if lemma_id == "sd_td":
            bound = statistical_distance(d1, d2)
            details["statistical_distance"] = bound
        else:
            eps = max(0.0, 1.0 - min_cross_overlap(d1[0], d2[0]))
            bound = bounds.trace_diameter_bound(eps, t)
            details["eps"] = eps
    else:
        vectors = np.atleast_2d(np.asarray(scenario["vectors"], dtype=np.complex128))
        weights = np.asarray(scenario["weights"], float)
        mapped = np.stack([scenario["phi"](v) for v in vectors])
        overlaps = np.abs(np.sum(_unit_rows(vectors).conj() * _unit_rows(mapped), axis=1))
        eps = max(0.0, 1.0 - float(overlaps.min()))
        td = _td((vectors, weights), (mapped, weights), t)
        bound = bounds.angular_bound(eps, t)
        details["eps"] = eps
        if "m" in params:
            # rounding at spacing 2^-m moves long vectors by at most 36 (2^-m)^2 in overlap
            details["instantiated_bound"] = bounds.angular_bound(36 * 4.0 ** -params["m"], t)
    details["margin"] = bound - td
    return LemmaReport(lemma_id, params, td, 0.0, bound, UPPER, decide(td, 0.0, bound, UPPER), 0,
                       mixing.seed_hex(seed), "exact", details)


def _embed(n: int, two_dim: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Place 2-D vectors in the first two coordinates and apply a random unitary."""
    N = 1 << n
    out = np.zeros((two_dim.shape[0], N), complex)
    out[:, :2] = two_dim
    if N > 2:
        z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        q, r = np.linalg.qr(z)
        out = out @ (q * (np.diag(r) / np.abs(np.diag(r)))).T
    return out


def two_point_scenario(lemma_id: str, n: int, seed=0, eps: float = 0.01, m: int = 7) -> dict:
    """Two-point ensembles for each distance statement.

    ``trace_diameter``: supports ``{cos a|0> +- sin a|1>}`` and
    ``{cos a|0> +- i sin a|1>}``, whose four cross overlaps all equal
    ``1 - eps``.  ``sd_td``: the same four states with two weightings.
    ``angular``: two long Gaussian vectors and the rounding map at ``2^-m``.
    """
    rng = mixing.numpy_rng(seed, "scenario", lemma_id, n, eps, m)
    if lemma_id in ("trace_diameter", "sd_td"):
        a = 0.5 * math.asin(math.sqrt(2 * (1 - (1 - eps) ** 2)))
        c, s = math.cos(a), math.sin(a)
        s1 = _embed(n, np.array([[c, s], [c, -s]], complex), rng)
        s2 = _embed(n, np.array([[c, 1j * s], [c, -1j * s]], complex), rng)
        if lemma_id == "trace_diameter":
            return {"D1": (s1, [0.5, 0.5]), "D2": (s2, [0.5, 0.5]), "params": {"n": n, "eps": eps}}
        states = np.concatenate([s1, s2])
        w1 = rng.dirichlet(np.ones(4))
        w2 = rng.dirichlet(np.ones(4))
        return {"D1": (states, w1), "D2": (states, w2), "params": {"n": n}}
    if lemma_id == "angular":
        N = 1 << n
        B = bounds.tail_cut(n, m)
        rp = RoundingParams(m, B)
        vectors = []
        while len(vectors) < 2:
            v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            if np.linalg.norm(v) >= math.sqrt(N) / 2 and np.max(np.abs(v)) <= B:
                vectors.append(v)
        return {"vectors": np.array(vectors), "weights": [0.5, 0.5],
                "phi": lambda v: round_complex(v, rp), "params": {"n": n, "m": m, "B": B}}
    raise KeyError(f"unknown distance lemma {lemma_id!r}")
