"""Exchangeable noise families and deterministic per-trial sampling.

All families produce exchangeable vectors: the joint law is invariant to
permuting coordinates.  That is the only distributional property the
truthfulness results need, so the families deliberately span iid noise, a
shared latent shift, and arbitrary base draws made exchangeable by a
uniform random permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError


@dataclass(frozen=True)
class NoiseModel:
    """A named noise family with its parameters.

    ``kind`` is one of ``iid-gaussian``, ``exchangeable-latent``, or
    ``permuted-base``.  Use the module factories instead of constructing
    directly; they validate parameters.
    """

    kind: str
    sigma: float = 0.0
    tau: float = 0.0
    base: object = field(default=None, compare=False)


def iid_gaussian(sigma: float) -> NoiseModel:
    """Independent centered gaussian noise per coordinate."""
    if not (np.isfinite(sigma) and sigma >= 0):
        raise ParameterError(f"sigma must be a nonnegative finite number, got {sigma}")
    return NoiseModel(kind="iid-gaussian", sigma=float(sigma))


def exchangeable_latent(sigma: float, tau: float) -> NoiseModel:
    """A shared latent shift ``N(0, tau^2)`` plus iid ``N(0, sigma^2)`` terms.

    Coordinates are correlated through the latent shift but remain
    exchangeable.  With ``sigma = 0`` every coordinate equals the shift.
    """
    if not (np.isfinite(sigma) and sigma >= 0):
        raise ParameterError(f"sigma must be a nonnegative finite number, got {sigma}")
    if not (np.isfinite(tau) and tau >= 0):
        raise ParameterError(f"tau must be a nonnegative finite number, got {tau}")
    return NoiseModel(kind="exchangeable-latent", sigma=float(sigma), tau=float(tau))


def permuted_base(base) -> NoiseModel:
    """Make any base draw exchangeable by a uniform random permutation.

    ``base`` is either a fixed vector (used as-is each trial) or a callable
    ``base(rng, n) -> vector``; in both cases the draw is shuffled by an
    independent uniform permutation, which forces exchangeability no matter
    how asymmetric the base is.
    """
    if base is None:
        raise ParameterError("permuted-base requires a base vector or callable")
    if not callable(base):
        arr = np.asarray(base, dtype=float)
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
            raise ParameterError("permuted-base vector must be a finite 1-d sequence")
        base = arr
    return NoiseModel(kind="permuted-base", base=base)


def trial_seed(master_seed: int, trial: int) -> tuple[int, int]:
    """Counter-based per-trial seed: a pure function of master seed and index.

    Feeding the pair to ``numpy.random.default_rng`` gives streams that are
    independent across trials and identical across runs and platforms, so
    trials can be replayed or distributed in any order.
    """
    return (int(master_seed), int(trial))


def sample_noise(model: NoiseModel, n: int, seed) -> np.ndarray:
    """Draw one noise vector of length ``n``; identical input, identical draw.

    ``seed`` may be anything ``numpy.random.default_rng`` accepts, most
    usefully the pair returned by ``trial_seed``.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    if model.kind == "iid-gaussian":
        return rng.normal(0.0, model.sigma, size=n) if model.sigma > 0 else np.zeros(n)
    if model.kind == "exchangeable-latent":
        shift = rng.normal(0.0, model.tau) if model.tau > 0 else 0.0
        draw = rng.normal(0.0, model.sigma, size=n) if model.sigma > 0 else np.zeros(n)
        return draw + shift
    if model.kind == "permuted-base":
        if callable(model.base):
            draw = np.asarray(model.base(rng, n), dtype=float)
            if draw.shape != (n,):
                raise ParameterError(
                    f"permuted-base callable returned shape {draw.shape}, expected ({n},)"
                )
        else:
            if model.base.size != n:
                raise ParameterError(
                    f"permuted-base vector has length {model.base.size}, expected {n}"
                )
            draw = model.base
        return draw[rng.permutation(n)]
    raise ParameterError(f"unknown noise kind {model.kind!r}")
