"""Desk-scale simulator and verifier for a scalable asymptotically random
state generator built from rounded Gaussian vectors and rejection sampling."""

__version__ = "0.1.0"
