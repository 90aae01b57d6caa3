"""I.i.d. (Bernoulli) shift on a finite alphabet."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from .base import ShiftModel, checked_prob


class BernoulliModel(ShiftModel):
    """Coordinates are i.i.d. with law ``probs``.

    Zero entries are allowed so that degenerate sources can be expressed;
    cylinders through such symbols simply have measure 0.
    """

    name = "bernoulli"
    psi0 = 0.0
    factorization_gap = 0

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float).ravel()
        if p.size < 1 or np.any(p < 0) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ParameterError("probs must be non-negative and sum to 1")
        self.probs = p
        self.alphabet_size = p.size
        self._cum = np.cumsum(p)
        top = float(p.max())
        self.gamma_bound = -math.log(top) if top < 1.0 else None

    def cylinder_prob(self, w):
        w = self.validate_word(w)
        factors = self.probs[list(w)]
        return checked_prob(float(math.prod(factors)), bool(np.all(factors > 0)))

    def log_cylinder_prob(self, w):
        w = self.validate_word(w)
        with np.errstate(divide="ignore"):
            return float(np.log(self.probs[list(w)]).sum())

    def path_probs(self, paths):
        return np.prod(self.probs[np.asarray(paths)], axis=-1)

    def sample_paths(self, count, length, rng):
        u = rng.random((count, length))
        if self.alphabet_size == 2:
            return (u >= self.probs[0]).astype(np.int8)
        idx = np.searchsorted(self._cum, u, side="right")
        return np.minimum(idx, self.alphabet_size - 1).astype(np.int16)

    def inverse_jacobian(self, block):
        block = self.validate_word(block)
        return float(self.probs[block[0]])

    def to_dict(self):
        return {"model": self.name, "probs": [float(x) for x in self.probs]}
