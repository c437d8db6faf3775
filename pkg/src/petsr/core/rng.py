"""Seeded random streams.

All randomness goes through a Philox4x64 counter-based generator keyed by a
``SeedSequence`` of ``(seed, *stream)``, so every stream is reproducible
across platforms and independent of call order elsewhere.
"""

from __future__ import annotations

import numpy as np

POISSON_NORMAL_THRESHOLD = 30.0
_MAX_INVERSION_STEPS = 256


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for ``seed`` and an optional integer sub-stream path."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def poisson_sample(lam: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Poisson draws: inversion for lambda < 30, rounded normal (clamped at 0) above.

    One uniform and one normal are consumed per bin regardless of lambda.
    """
    lam = np.asarray(lam, dtype=np.float64)
    u = rng.random(lam.shape)
    gauss = rng.standard_normal(lam.shape)

    counts = np.maximum(0.0, np.round(lam + np.sqrt(lam) * gauss))

    small = lam < POISSON_NORMAL_THRESHOLD
    if np.any(small):
        ls = lam[small]
        us = u[small]
        k = np.zeros_like(ls)
        p = np.exp(-ls)
        cdf = p.copy()
        active = us > cdf
        for _ in range(_MAX_INVERSION_STEPS):
            if not np.any(active):
                break
            k[active] += 1.0
            p[active] *= ls[active] / k[active]
            cdf[active] += p[active]
            active &= us > cdf
        counts[small] = k

    return counts
