"""The scalable ARS generator and its t-design and PRS instantiations.

Given oracle access to a random function with ``lam`` packets of ``r`` bits
per input, the generator decodes packet ``i`` at every input into a rounded
Gaussian vector ``v``, picks a long one (only needed when ``N <= lam``) and
runs amplified rejection sampling towards ``v / ||v||``.  Failure is
signalled by the basis state ``|0...0>``.

Everything is vectorised over a batch of independent functions (``runs``)
and over repeated rejection-sampling executions against the same function
(``copies``), which is how the verifier estimates multi-copy moments.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from arsim import mixing
from arsim.gaussian import RoundingParams, decode_samples
from arsim.oracles import (MWisePackets, OracleSpec, PrfKey, TDesignKey, ThreefryPackets,
                           mwise_independence_degree)
from arsim.rejection import first_success

MAX_N = 12
MAX_LAMBDA = 64
MIN_LAMBDA = 5


@dataclass(frozen=True)
class GenParams:
    n: int
    lam: int

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def eps(self) -> float:
        return math.ldexp(1.0, -self.n - self.lam)

    @property
    def B(self) -> int:
        # least integer with B^2 >= 4 (n + lam)
        return math.isqrt(4 * (self.n + self.lam) - 1) + 1

    @property
    def M(self) -> float:
        return math.sqrt(2.0) * self.B

    @property
    def k(self) -> int:
        return 8 * self.lam * self.B ** 2

    @property
    def rounding(self) -> RoundingParams:
        return RoundingParams(self.n + self.lam, self.B)

    @property
    def r(self) -> int:
        return self.rounding.sample_bits

    def as_dict(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "N": self.N, "eps": self.eps, "B": self.B,
                "M": self.M, "k": self.k, "r": self.r}


def gen_params(n: int, lam: int, min_lambda: int = MIN_LAMBDA) -> GenParams:
    """Validated parameters.  ``min_lambda`` may be lowered only by lemma checks
    that are stated for smaller security parameters."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must lie in 1..{MAX_N}, got {n}")
    if not min_lambda <= lam <= MAX_LAMBDA:
        raise ValueError(f"lambda must lie in {min_lambda}..{MAX_LAMBDA}, got {lam}")
    return GenParams(int(n), int(lam))


@dataclass
class GenOutcome:
    state: np.ndarray
    failed: bool
    branch: str  # "N>lambda" or "N<=lambda"
    candidate_index: int | None
    bvs_trials: int

    def summary(self) -> dict:
        d = asdict(self)
        d["state"] = [[z.real, z.imag] for z in self.state.tolist()]
        return d


@dataclass
class GenBatch:
    """Generator results for ``runs`` independent functions and ``copies`` executions each.

    ``vectors`` holds the selected (unnormalised) vector per run, zero where
    no candidate qualified; ``candidate`` is the 1-based packet index or 0;
    ``trials`` is the 1-based index of the first successful rejection
    attempt per execution, or 0 on failure.
    """

    params: GenParams
    vectors: np.ndarray
    candidate: np.ndarray
    trials: np.ndarray

    @property
    def branch(self) -> str:
        return branch_name(self.params)

    @property
    def success(self) -> np.ndarray:
        return self.trials > 0

    def targets(self) -> np.ndarray:
        """Normalised selected vectors; basis state 0 for runs without a candidate."""
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        out = np.divide(self.vectors, norms, out=np.zeros_like(self.vectors), where=norms > 0)
        out[norms[:, 0] == 0, 0] = 1.0
        return out

    def outcome(self, run: int = 0, copy: int = 0) -> GenOutcome:
        ok = bool(self.trials[run, copy])
        if ok:
            state = self.targets()[run]
        else:
            state = np.zeros(self.params.N, complex)
            state[0] = 1.0
        cand = int(self.candidate[run]) or None
        return GenOutcome(state, not ok, self.branch, cand,
                          int(self.trials[run, copy]) if ok else self.params.k)


def branch_name(params: GenParams) -> str:
    return "N>lambda" if params.N > params.lam else "N<=lambda"


def _decode_packet(source, params: GenParams, i: int, rows=None) -> np.ndarray:
    words, offset = source.packet_words(i, rows)
    return decode_samples(words, offset, params.rounding)


def select_vectors(params: GenParams, source) -> tuple[np.ndarray, np.ndarray]:
    """Selected vector and 1-based candidate index per function in ``source``."""
    runs = len(source)
    if params.N > params.lam:
        return _decode_packet(source, params, 1), np.ones(runs, dtype=np.int64)
    threshold = params.N / 4.0
    vectors = np.zeros((runs, params.N), dtype=np.complex128)
    candidate = np.zeros(runs, dtype=np.int64)
    pending = np.arange(runs)
    for i in range(1, params.lam + 1):
        if pending.size == 0:
            break
        v = _decode_packet(source, params, i, pending)
        good = np.sum(np.abs(v) ** 2, axis=1) >= threshold
        vectors[pending[good]] = v[good]
        candidate[pending[good]] = i
        pending = pending[~good]
    return vectors, candidate


def generate_batch(params: GenParams, source, copies: int, rng: np.random.Generator) -> GenBatch:
    """Run the generator ``copies`` times against each function of ``source``."""
    vectors, candidate = select_vectors(params, source)
    p = np.sum(np.abs(vectors) ** 2, axis=1) / (params.M ** 2 * params.N)
    trials = first_success(p[:, None], params.k, rng, size=(len(source), copies))
    return GenBatch(params, vectors, candidate, trials)


def _check_match(params: GenParams, n: int, packet_bits: int, packets: int | None = None):
    if n != params.n or packet_bits != params.r or (packets is not None and packets != params.lam):
        raise ValueError("oracle does not match the generator parameters "
                         f"(need n={params.n}, r={params.r}, packets={params.lam})")


def vector_from_function(spec: OracleSpec, packet: int, params: GenParams) -> np.ndarray:
    """Entry ``x`` is the sample decoded from packet ``packet`` of the oracle at ``x``."""
    _check_match(params, spec.n, spec.packet_bits, spec.packets)
    if not 1 <= packet <= params.lam:
        raise ValueError(f"packet index {packet} outside 1..{params.lam}")
    return _decode_packet(ThreefryPackets.from_spec(spec), params, packet)[0]


def oracle_for(params: GenParams, seed) -> OracleSpec:
    return OracleSpec(seed, params.n, params.r, params.lam)


def ars_generate(params: GenParams, spec: OracleSpec, rng: np.random.Generator) -> GenOutcome:
    _check_match(params, spec.n, spec.packet_bits, spec.packets)
    return generate_batch(params, ThreefryPackets.from_spec(spec), 1, rng).outcome()


def tdesign_keygen(n: int, lam: int, t: int, rng: np.random.Generator) -> TDesignKey:
    """Key of ``2 t lam 2^n``-wise independent 64-bit lanes covering ``lam * r`` output bits."""
    params = gen_params(n, lam)
    m = mwise_independence_degree(t, lam, n)
    out_bits = lam * params.r
    lanes = -(-out_bits // 64)
    coeffs = rng.integers(0, 1 << 64, size=(lanes, m), dtype=np.uint64)
    return TDesignKey(n, lam, t, m, out_bits, coeffs)


def tdesign_generate(key: TDesignKey, params: GenParams, rng: np.random.Generator) -> GenOutcome:
    _check_match(params, key.n, key.output_bits // key.lam, key.lam)
    return generate_batch(params, MWisePackets.from_key(key, params.r), 1, rng).outcome()


def prs_keygen(n: int, lam: int, rng: np.random.Generator) -> PrfKey:
    params = gen_params(n, lam)
    words = rng.integers(0, 1 << 64, size=4, dtype=np.uint64)
    return PrfKey(mixing.words_to_seed(words), n, lam * params.r)


def prs_generate(key: PrfKey, params: GenParams, rng: np.random.Generator) -> GenOutcome:
    _check_match(params, key.n, key.output_bits // params.lam)
    return generate_batch(params, ThreefryPackets.from_prf(key, params.r), 1, rng).outcome()
