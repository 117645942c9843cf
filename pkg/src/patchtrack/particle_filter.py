"""Sequential Monte Carlo engine over (x, y) object-center states.

Dynamics are a Gaussian random walk; the noise source is numpy's PCG64
generator, seeded per particle set, so runs are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import LengthMismatch

# Identifier of the noise generator backing predict/resample.
GENERATOR_ALGORITHM = "pcg64"


@dataclass(frozen=True)
class MotionModel:
    std_x: float = 8.0
    std_y: float = 8.0

    def __post_init__(self):
        if self.std_x < 0 or self.std_y < 0:
            raise ValueError("motion stds must be >= 0")


@dataclass
class ParticleSet:
    xs: np.ndarray
    ys: np.ndarray
    weights: np.ndarray
    rng: np.random.Generator
    degenerate: bool = False

    def __len__(self) -> int:
        return self.xs.size


def create_particles(x: float, y: float, count: int, seed: int) -> ParticleSet:
    """All particles at (x, y) with uniform weights and a fresh generator."""
    if count < 1:
        raise ValueError("particle count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return ParticleSet(np.full(count, float(x)), np.full(count, float(y)),
                       np.full(count, 1.0 / count), rng)


def predict(ps: ParticleSet, m: MotionModel) -> ParticleSet:
    """Perturb positions with independent zero-mean Gaussian noise; weights
    are untouched. Advances the set's generator."""
    n = len(ps)
    dx = ps.rng.normal(0.0, m.std_x, n)
    dy = ps.rng.normal(0.0, m.std_y, n)
    return replace(ps, xs=ps.xs + dx, ys=ps.ys + dy)


def reweight(ps: ParticleSet, likelihoods: Sequence[float]) -> ParticleSet:
    """Set weights proportional to the likelihoods.

    An all-zero likelihood vector falls back to uniform weights with the
    degenerate flag raised.
    """
    like = np.asarray(likelihoods, dtype=np.float64)
    if like.size != len(ps):
        raise LengthMismatch(f"{like.size} likelihoods for {len(ps)} particles")
    if np.any(like < 0) or not np.all(np.isfinite(like)):
        raise ValueError("likelihoods must be finite and >= 0")
    total = like.sum()
    if total == 0.0:
        return replace(ps, weights=np.full(len(ps), 1.0 / len(ps)), degenerate=True)
    return replace(ps, weights=like / total, degenerate=False)


def effective_sample_size(ps: ParticleSet) -> float:
    """1 / sum(w^2), in [1, N] for normalized weights."""
    return float(1.0 / np.sum(ps.weights ** 2))


def systematic_resample(ps: ParticleSet) -> ParticleSet:
    """Systematic (single-offset stratified) resampling to uniform weights.

    Count is preserved and the draw comes from the set's generator, so the
    operation is deterministic given the seed.
    """
    n = len(ps)
    u = ps.rng.uniform()
    positions = (u + np.arange(n)) / n
    cumulative = np.cumsum(ps.weights)
    cumulative[-1] = 1.0
    idx = np.searchsorted(cumulative, positions, side="right")
    return replace(ps, xs=ps.xs[idx].copy(), ys=ps.ys[idx].copy(),
                   weights=np.full(n, 1.0 / n), degenerate=False)


def estimate(ps: ParticleSet) -> tuple[float, float]:
    """Weighted mean state (sum w*x, sum w*y)."""
    return float(ps.weights @ ps.xs), float(ps.weights @ ps.ys)
