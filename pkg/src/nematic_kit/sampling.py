"""Seeded random draws shared by tests, sweeps and the CLI."""

from __future__ import annotations

import numpy as np

from .coefficients import FrankCoefficients, LeslieCoefficients, validate_frank

__all__ = [
    "unit_vector",
    "unit_vectors",
    "tangent_gradient",
    "random_frank",
    "random_leslie",
]


def unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def tangent_gradient(rng: np.random.Generator, d: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Random gradient sample consistent with a unit field: columns of the
    result are orthogonal to d (the sampled d_j |d|^2 = 0 constraint)."""
    P = np.eye(3) - np.outer(d, d)
    return scale * (P @ rng.standard_normal((3, 3)))


def random_frank(rng: np.random.Generator, alpha_fraction: float | None = None) -> FrankCoefficients:
    """Admissible elastic constants: log-uniform k's resampled until the
    anisotropy disjunction holds, margin a random (or fixed) fraction of
    min(k1,k2,k3)."""
    while True:
        k1, k2, k3 = np.exp(rng.uniform(np.log(0.25), np.log(4.0), size=3))
        if not (9.0 * k3 > k1 or 2.0 * abs(k1 - k3) < min(k2, k3)):
            continue
        frac = alpha_fraction if alpha_fraction is not None else rng.uniform(0.2, 0.95)
        c = FrankCoefficients(k1=k1, k2=k2, k3=k3, alpha=frac * min(k1, k2, k3))
        if validate_frank(c).passed:
            return c


def random_leslie(rng: np.random.Generator, couplings: bool = True) -> LeslieCoefficients:
    """Viscosity set satisfying the strict positivity assumptions; the
    coupling viscosities are sign-unconstrained."""
    return LeslieCoefficients(
        mu_s=float(rng.uniform(0.2, 3.0)),
        mu_V=float(rng.uniform(-1.0, 1.0)) if couplings else 0.0,
        mu_D=float(rng.uniform(-1.0, 1.0)) if couplings else 0.0,
        mu_P=float(rng.uniform(-1.0, 1.0)) if couplings else 0.0,
        mu_L=float(rng.uniform(0.0, 1.0)),
        mu_0=float(rng.uniform(0.0, 1.0)),
        mu_b=float(rng.uniform(0.0, 0.5)),
        gamma=float(rng.uniform(0.3, 3.0)),
        rho=float(rng.uniform(0.5, 2.0)),
    )
