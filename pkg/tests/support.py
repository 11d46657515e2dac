"""Shared helpers for the test modules."""

import numpy as np

from umbilic_lab.constructions import Beta


def disc(rng, n, radius):
    """``n`` points uniform in the disc ``|w| < radius``."""
    return radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))


def constant_beta(b):
    zero = lambda w: np.zeros_like(np.asarray(w, dtype=complex))
    return Beta(lambda w: np.full(np.shape(w), b, dtype=complex), zero, zero, f"const {b}")
