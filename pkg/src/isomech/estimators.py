"""Scikit-learn style estimator around the adjustment mechanism.

The estimator treats one score vector as a sample of item scores and
adjusts it under the configured report.  ``fit`` validates and records
diagnostics, ``transform`` adjusts, and parameters follow the usual
``get_params``/``set_params``/``clone`` conventions so the adjuster drops
into pipelines and grid searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import ParameterError
from .mechanism import MechanismConfig, block_ranking, full_ranking, run_mechanism


class ScoreAdjuster(BaseEstimator, TransformerMixin):
    """Adjust raw scores to respect a reported ranking.

    Parameters
    ----------
    ranking : sequence of int, optional
        Full ranking, best item first.  Required unless ``blocks`` is set.
    blocks : sequence of sequences of int, optional
        Ordered partition, best block first.  Requires ``variant="block"``.
    variant : str, default "hard"
        One of ``hard``, ``block``, ``convex-combination``, ``penalized``.
    theta : float, default 0.5
        Blend weight for ``convex-combination``.
    lam : float, default 1.0
        Penalty weight for ``penalized``.

    Attributes set by ``fit``: ``adjusted_``, ``pools_``, ``objective_``,
    ``residual_``, ``n_items_``.
    """

    def __init__(self, ranking=None, blocks=None, variant="hard", theta=0.5, lam=1.0):
        self.ranking = ranking
        self.blocks = blocks
        self.variant = variant
        self.theta = theta
        self.lam = lam

    def _config(self) -> MechanismConfig:
        if self.variant == "convex-combination":
            return MechanismConfig(variant=self.variant, theta=self.theta)
        if self.variant == "penalized":
            return MechanismConfig(variant=self.variant, lam=self.lam)
        return MechanismConfig(variant=self.variant)

    def _report(self):
        if self.variant == "block":
            if self.blocks is None:
                raise ParameterError("variant='block' requires blocks")
            return block_ranking(self.blocks)
        if self.ranking is None:
            raise ParameterError(f"variant={self.variant!r} requires a ranking")
        return full_ranking(self.ranking)

    @staticmethod
    def _as_vector(X) -> np.ndarray:
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        return arr

    def fit(self, X, y=None):
        """Validate the configuration against one score vector."""
        scores = self._as_vector(X)
        outcome = run_mechanism(scores, self._report(), self._config())
        self.n_items_ = scores.size
        self.adjusted_ = outcome.adjusted
        self.pools_ = outcome.diagnostics.pools
        self.objective_ = outcome.diagnostics.objective
        self.residual_ = outcome.diagnostics.residual
        return self

    def transform(self, X) -> np.ndarray:
        """Adjust a score vector of the same length seen in ``fit``."""
        if not hasattr(self, "n_items_"):
            raise NotFittedError("ScoreAdjuster must be fitted before transform")
        scores = self._as_vector(X)
        if scores.size != self.n_items_:
            raise ParameterError(
                f"transform saw {scores.size} items, fit saw {self.n_items_}"
            )
        return run_mechanism(scores, self._report(), self._config()).adjusted

    def predict(self, X) -> np.ndarray:
        """Alias for ``transform``; adjusted scores are the prediction."""
        return self.transform(X)
