"""Numerical verification of the generator's supporting statements."""

from arsim.verify.bounds import (coord_bound_probability_exact, layer_final_bound,
                                 layer_intermediate_bound, layer_probability_exact, tail_cut,
                                 theorem_bound)
from arsim.verify.distance import DISTANCE_IDS, two_point_scenario, verify_distance_lemma
from arsim.verify.e2e import e2e_trace_distance
from arsim.verify.hybrid import STEPS, hybrid_step_check
from arsim.verify.lemmas import LEMMA_IDS, InsufficientSamples, verify_lemma
from arsim.verify.suite import run_suite
from arsim.verify.reports import HybridStepReport, LemmaReport, to_csv

__all__ = [
    "DISTANCE_IDS", "HybridStepReport", "InsufficientSamples", "LEMMA_IDS", "LemmaReport", "STEPS",
    "coord_bound_probability_exact", "e2e_trace_distance", "hybrid_step_check",
    "layer_final_bound", "layer_intermediate_bound", "layer_probability_exact", "run_suite", "tail_cut",
    "theorem_bound", "to_csv", "two_point_scenario", "verify_distance_lemma", "verify_lemma",
]
