"""Shared benchmark defaults."""

from __future__ import annotations

import numpy as np

from .lifted import Signal

NOISE_SIGMA_FRACTION = 0.01


def default_noise_sigma(disturbance: Signal) -> float:
    """Noisy-benchmark default: 1% of the RMS of the disturbance."""
    return NOISE_SIGMA_FRACTION * float(np.sqrt(np.mean(disturbance.data ** 2)))
